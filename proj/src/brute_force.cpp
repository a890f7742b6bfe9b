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

#include "patchknn/brute_force.hpp"

#include <algorithm>
#include <string>

#include "patchknn/error.hpp"

namespace patchknn {

namespace {

void check_query(const FeatureMatrix& m, std::size_t query, std::size_t k) {
  if (query >= m.rows()) {
    throw Error(Errc::out_of_bounds,
                "query id " + std::to_string(query) + " out of range [0, " + std::to_string(m.rows()) + ")");
  }
  if (k < 1) throw Error(Errc::invalid_params, "k must be >= 1");
}

std::vector<Neighbor> select(std::vector<Neighbor> all, std::size_t k) {
  k = std::min(k, all.size());
  if (k < all.size()) {
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), neighbor_less);
    all.resize(k);
  }
  std::sort(all.begin(), all.end(), neighbor_less);
  return all;
}

std::vector<Neighbor> scan(const FeatureMatrix& m, std::span<const double> q, Metric metric) {
  const auto n = static_cast<std::ptrdiff_t>(m.rows());
  std::vector<Neighbor> all(m.rows());
  if (metric == Metric::cosine) {
    const double q_norm = dot(q, q);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      const auto row = m.row(static_cast<std::size_t>(r));
      all[static_cast<std::size_t>(r)] = {static_cast<std::size_t>(r),
                                          cosine_distance_from(dot(q, row), q_norm, dot(row, row))};
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      all[static_cast<std::size_t>(r)] = {static_cast<std::size_t>(r),
                                          euclidean_distance(q, m.row(static_cast<std::size_t>(r)))};
    }
  }
  return all;
}

}  // namespace

std::vector<Neighbor> brute_knn(const FeatureMatrix& m, std::size_t query, const KnnOptions& options) {
  check_query(m, query, options.k);
  std::vector<Neighbor> all = scan(m, m.row(query), options.metric);
  if (options.exclude_self) all.erase(all.begin() + static_cast<std::ptrdiff_t>(query));
  return select(std::move(all), options.k);
}

std::vector<Neighbor> brute_knn(const FeatureMatrix& m, std::span<const double> query, std::size_t k, Metric metric) {
  if (k < 1) throw Error(Errc::invalid_params, "k must be >= 1");
  if (query.size() != m.cols()) throw Error(Errc::invalid_params, "query dimension does not match matrix");
  return select(scan(m, query, metric), k);
}

namespace reference {

std::vector<Neighbor> brute_knn_serial(const FeatureMatrix& m, std::size_t query, const KnnOptions& options) {
  check_query(m, query, options.k);
  std::vector<Neighbor> all;
  all.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (options.exclude_self && r == query) continue;
    all.push_back({r, distance(options.metric, m.row(query), m.row(r))});
  }
  std::sort(all.begin(), all.end(), neighbor_less);
  all.resize(std::min(options.k, all.size()));
  return all;
}

}  // namespace reference

}  // namespace patchknn
