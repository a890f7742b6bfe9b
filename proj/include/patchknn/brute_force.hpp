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
#include <vector>

#include "patchknn/distance.hpp"
#include "patchknn/feature_matrix.hpp"

namespace patchknn {

struct Neighbor {
  std::size_t id = 0;
  double distance = 0;
  bool operator==(const Neighbor&) const = default;
};

/// Ascending distance, ties broken by ascending id.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) noexcept {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

struct KnnOptions {
  std::size_t k = 5;
  Metric metric = Metric::cosine;
  bool exclude_self = false;
};

/// Exact k nearest rows to row `query` by a full scan. Distances are computed
/// in parallel (OpenMP); the selection is deterministic. Returns min(k, N)
/// neighbors (one fewer candidate when exclude_self is set).
std::vector<Neighbor> brute_knn(const FeatureMatrix& m, std::size_t query, const KnnOptions& options);

/// Same, for an arbitrary query vector.
std::vector<Neighbor> brute_knn(const FeatureMatrix& m, std::span<const double> query, std::size_t k, Metric metric);

namespace reference {

/// Serial scan with a full sort of every distance.
std::vector<Neighbor> brute_knn_serial(const FeatureMatrix& m, std::size_t query, const KnnOptions& options);

}  // namespace reference

}  // namespace patchknn
