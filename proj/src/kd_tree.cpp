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

#include "patchknn/kd_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "patchknn/error.hpp"

namespace patchknn {

KdTree KdTree::build(const FeatureMatrix& m, const KdTreeOptions& options) {
  if (m.rows() == 0) throw Error(Errc::invalid_params, "cannot build a kd-tree over an empty matrix");
  if (m.rows() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::invalid_params, "too many points for a kd-tree");
  }
  if (options.leaf_capacity < 1) throw Error(Errc::invalid_params, "leaf capacity must be >= 1");
  KdTree tree;
  tree.dims_ = m.cols();
  tree.leaf_capacity_ = options.leaf_capacity;
  tree.ids_.resize(m.rows());
  std::iota(tree.ids_.begin(), tree.ids_.end(), std::size_t{0});
  tree.nodes_.reserve(2 * (m.rows() / options.leaf_capacity + 1));
  tree.build_node(m, 0, static_cast<std::uint32_t>(m.rows()));
  tree.points_.resize(m.rows() * m.cols());
  for (std::size_t slot = 0; slot < tree.ids_.size(); ++slot) {
    const auto row = m.row(tree.ids_[slot]);
    std::copy(row.begin(), row.end(), tree.points_.begin() + static_cast<std::ptrdiff_t>(slot * m.cols()));
  }
  return tree;
}

std::int32_t KdTree::build_node(const FeatureMatrix& m, std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  const std::size_t n = end - begin;
  if (n <= leaf_capacity_) return index;

  // Pick the widest-variance dimension among those that are not constant.
  std::int32_t best_dim = -1;
  double best_var = -1;
  for (std::size_t d = 0; d < dims_; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double mean = 0;
    for (std::uint32_t s = begin; s < end; ++s) {
      const double v = m.at(ids_[s], d);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      mean += v;
    }
    if (!(hi > lo)) continue;
    mean /= static_cast<double>(n);
    double var = 0;
    for (std::uint32_t s = begin; s < end; ++s) {
      const double dv = m.at(ids_[s], d) - mean;
      var += dv * dv;
    }
    if (var > best_var) {
      best_var = var;
      best_dim = static_cast<std::int32_t>(d);
    }
  }
  if (best_dim < 0) return index;  // all points identical

  const auto dim = static_cast<std::size_t>(best_dim);
  const auto first = ids_.begin() + begin;
  const auto last = ids_.begin() + end;
  std::sort(first, last, [&](std::size_t a, std::size_t b) {
    const double va = m.at(a, dim);
    const double vb = m.at(b, dim);
    return va < vb || (va == vb && a < b);
  });
  auto value_of = [&](std::size_t id) { return m.at(id, dim); };
  double median = value_of(*(first + static_cast<std::ptrdiff_t>((n - 1) / 2)));
  auto split = std::partition_point(first, last, [&](std::size_t id) { return value_of(id) < median; });
  if (split == first) {
    // Every value left of the median equals it; split just above the run.
    split = std::partition_point(first, last, [&](std::size_t id) { return value_of(id) <= median; });
    median = value_of(*split);
  }
  const auto mid = static_cast<std::uint32_t>(split - ids_.begin());

  const std::int32_t left = build_node(m, begin, mid);
  const std::int32_t right = build_node(m, mid, end);
  Node& node = nodes_[static_cast<std::size_t>(index)];
  node.split_dim = best_dim;
  node.split_value = median;
  node.left = left;
  node.right = right;
  return index;
}

namespace {

class BoundedHeap {
 public:
  explicit BoundedHeap(std::size_t k) : k_(k) { items_.reserve(k); }

  bool full() const noexcept { return items_.size() == k_; }
  double worst() const noexcept { return items_.front().distance; }

  void offer(const Neighbor& n) {
    if (!full()) {
      items_.push_back(n);
      std::push_heap(items_.begin(), items_.end(), neighbor_less);
    } else if (neighbor_less(n, items_.front())) {
      std::pop_heap(items_.begin(), items_.end(), neighbor_less);
      items_.back() = n;
      std::push_heap(items_.begin(), items_.end(), neighbor_less);
    }
  }

  std::vector<Neighbor> take_sorted() {
    std::sort_heap(items_.begin(), items_.end(), neighbor_less);
    return std::move(items_);
  }

 private:
  std::size_t k_;
  std::vector<Neighbor> items_;
};

}  // namespace

std::vector<Neighbor> KdTree::knn(std::span<const double> query, std::size_t k) const {
  if (k < 1) throw Error(Errc::invalid_params, "k must be >= 1");
  if (query.size() != dims_) {
    throw Error(Errc::invalid_params, "query has " + std::to_string(query.size()) + " dimensions, tree has " +
                                          std::to_string(dims_));
  }
  BoundedHeap heap(std::min(k, size()));

  auto visit = [&](auto&& self, std::int32_t index) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(index)];
    if (node.leaf()) {
      for (std::uint32_t s = node.begin; s < node.end; ++s) {
        heap.offer({ids_[s], euclidean_distance(query, point(s))});
      }
      return;
    }
    const double q = query[static_cast<std::size_t>(node.split_dim)];
    const bool go_left = q < node.split_value;
    self(self, go_left ? node.left : node.right);
    // Any point across the plane is at least this far away; the same
    // floating-point steps as euclidean_distance keep the bound exact.
    const double gap = go_left ? node.split_value - q : q - node.split_value;
    const double bound = std::sqrt(gap * gap);
    if (!heap.full() || bound <= heap.worst()) {
      self(self, go_left ? node.right : node.left);
    }
  };
  visit(visit, 0);
  return heap.take_sorted();
}

std::vector<Neighbor> kd_knn(const KdTree& tree, const FeatureMatrix& m, std::size_t query, std::size_t k,
                             bool exclude_self) {
  if (query >= m.rows()) {
    throw Error(Errc::out_of_bounds,
                "query id " + std::to_string(query) + " out of range [0, " + std::to_string(m.rows()) + ")");
  }
  if (!exclude_self) return tree.knn(m.row(query), k);
  auto result = tree.knn(m.row(query), k + 1);
  const auto self = std::find_if(result.begin(), result.end(), [&](const Neighbor& n) { return n.id == query; });
  if (self != result.end()) {
    result.erase(self);
  } else if (result.size() > k) {
    result.pop_back();
  }
  return result;
}

}  // namespace patchknn
