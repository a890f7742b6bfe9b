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
#include <span>
#include <vector>

#include "patchknn/features.hpp"
#include "patchknn/patch_grid.hpp"

namespace patchknn {

/// Row-major N_p x N_f matrix of feature values.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols);
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> row(std::size_t r) const noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  double at(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  bool normalized() const noexcept { return normalized_; }
  /// Raw-space (min, max) per column; empty unless normalized.
  std::span<const double> column_min() const noexcept { return col_min_; }
  std::span<const double> column_max() const noexcept { return col_max_; }

  /// Marks the matrix normalized with the given raw-space column ranges.
  void set_normalization(std::vector<double> col_min, std::vector<double> col_max);

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  bool normalized_ = false;
  std::vector<double> col_min_;
  std::vector<double> col_max_;
};

/// Row t holds feature_vector(grid.patch(t)). Rows are filled in parallel
/// (OpenMP); the result does not depend on the thread count.
FeatureMatrix build_feature_matrix(const PatchGrid& grid, const FeatureParams& params);

/// Per column: v' = (v - min) / (max - min); constant columns become 0.
/// Normalizing an already normalized matrix leaves its values unchanged and
/// keeps the recorded ranges in raw feature space.
FeatureMatrix normalize_minmax(const FeatureMatrix& m);

namespace reference {

FeatureMatrix build_feature_matrix_serial(const PatchGrid& grid, const FeatureParams& params);

}  // namespace reference

}  // namespace patchknn
