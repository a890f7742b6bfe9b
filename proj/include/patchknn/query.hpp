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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "patchknn/brute_force.hpp"
#include "patchknn/feature_matrix.hpp"
#include "patchknn/kd_tree.hpp"
#include "patchknn/patch_grid.hpp"

namespace patchknn {

enum class Method { brute, kdtree };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);

struct RankedPatch {
  std::size_t id = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  double distance = 0;
  bool operator==(const RankedPatch&) const = default;
};

struct QueryResult {
  std::size_t query_id = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  Method method = Method::kdtree;
  Metric metric = Metric::euclidean;
  std::size_t k = 0;
  std::vector<RankedPatch> neighbors;
  double elapsed_s = 0;
};

nlohmann::json to_json(const QueryResult& result);

/// Normalized feature matrix, its grid and a kd-tree over it. Immutable once
/// built, so concurrent queries need no locking.
class SearchIndex {
 public:
  SearchIndex(FeatureMatrix matrix, GridShape grid, const KdTreeOptions& options = {});

  const FeatureMatrix& matrix() const noexcept { return matrix_; }
  const GridShape& grid() const noexcept { return grid_; }
  const KdTree& tree() const noexcept { return tree_; }

  struct Request {
    std::size_t query_id = 0;
    std::size_t k = 5;
    Method method = Method::kdtree;
    /// Unset means cosine for brute force and euclidean for the kd-tree,
    /// which supports nothing else.
    std::optional<Metric> metric;
    bool exclude_self = false;

    Metric resolved_metric() const noexcept {
      return metric.value_or(method == Method::brute ? Metric::cosine : Metric::euclidean);
    }
  };

  /// Runs one query and times the search itself (not the JSON shaping).
  QueryResult query(const Request& request) const;

  /// Neighbor list only, no timing or coordinates.
  std::vector<Neighbor> search(const Request& request) const;

 private:
  FeatureMatrix matrix_;
  GridShape grid_;
  KdTree tree_;
};

}  // namespace patchknn
