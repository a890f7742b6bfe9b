// Copyright 2026 The patchknn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "patchknn/query.hpp"

#include <chrono>

#include "patchknn/error.hpp"

namespace patchknn {

std::string_view to_string(Method method) noexcept { return method == Method::brute ? "brute" : "kdtree"; }

Method parse_method(std::string_view name) {
  if (name == "brute") return Method::brute;
  if (name == "kdtree") return Method::kdtree;
  throw Error(Errc::invalid_params, "unknown method '" + std::string(name) + "' (expected brute or kdtree)");
}

nlohmann::json to_json(const QueryResult& result) {
  nlohmann::json neighbors = nlohmann::json::array();
  for (const RankedPatch& n : result.neighbors) {
    neighbors.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"distance", n.distance}});
  }
  return {
      {"query_id", result.query_id},
      {"x", result.x},
      {"y", result.y},
      {"method", to_string(result.method)},
      {"metric", to_string(result.metric)},
      {"k", result.k},
      {"neighbors", std::move(neighbors)},
      {"elapsed_s", result.elapsed_s},
  };
}

SearchIndex::SearchIndex(FeatureMatrix matrix, GridShape grid, const KdTreeOptions& options)
    : matrix_(std::move(matrix)), grid_(grid), tree_(KdTree::build(matrix_, options)) {
  if (matrix_.rows() != grid_.patch_count()) {
    throw Error(Errc::invalid_params, "matrix has " + std::to_string(matrix_.rows()) + " rows but the grid has " +
                                          std::to_string(grid_.patch_count()) + " patches");
  }
}

std::vector<Neighbor> SearchIndex::search(const Request& request) const {
  if (request.method == Method::kdtree) {
    if (request.resolved_metric() != Metric::euclidean) {
      throw Error(Errc::invalid_params, "the kdtree method only supports the euclidean metric");
    }
    return kd_knn(tree_, matrix_, request.query_id, request.k, request.exclude_self);
  }
  return brute_knn(matrix_, request.query_id, {request.k, request.resolved_metric(), request.exclude_self});
}

QueryResult SearchIndex::query(const Request& request) const {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Neighbor> found = search(request);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  const PatchCoords origin = patch_coords(request.query_id, grid_);
  QueryResult result{request.query_id, origin.x,  origin.y, request.method, request.resolved_metric(),
                     request.k,        {},        elapsed.count()};
  result.neighbors.reserve(found.size());
  for (const Neighbor& n : found) {
    const PatchCoords c = patch_coords(n.id, grid_);
    result.neighbors.push_back({n.id, c.x, c.y, n.distance});
  }
  return result;
}

}  // namespace patchknn
