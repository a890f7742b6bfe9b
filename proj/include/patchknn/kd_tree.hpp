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
#include <cstdint>
#include <span>
#include <vector>

#include "patchknn/brute_force.hpp"
#include "patchknn/feature_matrix.hpp"

namespace patchknn {

struct KdTreeOptions {
  std::size_t leaf_capacity = 16;
};

/// Exact euclidean kd-tree. Each internal node splits on the dimension of
/// largest variance at the median value (lower middle for even counts);
/// points below the split go left, points at or above it go right.
///
/// Points are copied in leaf order, so the tree does not reference the
/// matrix it was built from.
class KdTree {
 public:
  struct Node {
    std::uint32_t begin = 0;  // slot range into ids()
    std::uint32_t end = 0;
    std::int32_t split_dim = -1;  // -1 for leaves
    double split_value = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    bool leaf() const noexcept { return split_dim < 0; }
  };

  static KdTree build(const FeatureMatrix& m, const KdTreeOptions& options = {});

  /// EXACT k nearest by euclidean distance, ordered by (distance, id).
  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k) const;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t leaf_capacity() const noexcept { return leaf_capacity_; }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  /// Point ids in leaf order; each node covers ids()[begin, end).
  std::span<const std::size_t> ids() const noexcept { return ids_; }
  std::span<const double> point(std::size_t slot) const noexcept { return {points_.data() + slot * dims_, dims_}; }

 private:
  std::int32_t build_node(const FeatureMatrix& m, std::uint32_t begin, std::uint32_t end);

  std::size_t dims_ = 0;
  std::size_t leaf_capacity_ = 16;
  std::vector<Node> nodes_;
  std::vector<std::size_t> ids_;
  std::vector<double> points_;
};

inline KdTree kd_build(const FeatureMatrix& m, const KdTreeOptions& options = {}) { return KdTree::build(m, options); }

inline std::vector<Neighbor> kd_knn(const KdTree& tree, std::span<const double> query, std::size_t k) {
  return tree.knn(query, k);
}

/// Query by row id of the indexed matrix, with optional self exclusion.
std::vector<Neighbor> kd_knn(const KdTree& tree, const FeatureMatrix& m, std::size_t query, std::size_t k,
                             bool exclude_self = false);

}  // namespace patchknn
