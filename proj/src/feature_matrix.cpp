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

#include "patchknn/feature_matrix.hpp"

#include <algorithm>
#include <exception>
#include <string>

#include "patchknn/error.hpp"

namespace patchknn {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(Errc::invalid_params, "matrix payload has " + std::to_string(values_.size()) + " values, expected " +
                                          std::to_string(rows_ * cols_));
  }
}

void FeatureMatrix::set_normalization(std::vector<double> col_min, std::vector<double> col_max) {
  if (col_min.size() != cols_ || col_max.size() != cols_) {
    throw Error(Errc::invalid_params, "normalization ranges must have one entry per column");
  }
  col_min_ = std::move(col_min);
  col_max_ = std::move(col_max);
  normalized_ = true;
}

FeatureMatrix build_feature_matrix(const PatchGrid& grid, const FeatureParams& params) {
  params.validate_for_patch(grid.patch_size());
  const FeatureExtractor extract(params);
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  FeatureMatrix m(grid.size(), kFeatureCount);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    try {
      const FeatureVector v = extract(grid.patch(static_cast<std::size_t>(t)));
      std::copy(v.begin(), v.end(), m.row(static_cast<std::size_t>(t)).begin());
    } catch (...) {
#pragma omp critical(patchknn_build_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return m;
}

FeatureMatrix normalize_minmax(const FeatureMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<double> lo(cols, 0.0);
  std::vector<double> hi(cols, 0.0);
  if (rows > 0) {
    for (std::size_t c = 0; c < cols; ++c) {
      lo[c] = hi[c] = m.at(0, c);
    }
    for (std::size_t r = 1; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        lo[c] = std::min(lo[c], m.at(r, c));
        hi[c] = std::max(hi[c], m.at(r, c));
      }
    }
  }
  FeatureMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double range = hi[c] - lo[c];
      out.row(r)[c] = range > 0 ? (m.at(r, c) - lo[c]) / range : 0.0;
    }
  }
  if (!m.normalized()) {
    out.set_normalization(std::move(lo), std::move(hi));
    return out;
  }
  // Compose with the existing affine map so ranges stay in raw units.
  std::vector<double> raw_lo(cols);
  std::vector<double> raw_hi(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const double base = m.column_min()[c];
    const double span = m.column_max()[c] - base;
    raw_lo[c] = lo[c] == 0.0 ? base : base + lo[c] * span;
    raw_hi[c] = hi[c] == 1.0 ? m.column_max()[c] : base + hi[c] * span;
    if (hi[c] == lo[c]) {
      raw_lo[c] = m.column_min()[c];
      raw_hi[c] = m.column_max()[c];
    }
  }
  out.set_normalization(std::move(raw_lo), std::move(raw_hi));
  return out;
}

namespace reference {

FeatureMatrix build_feature_matrix_serial(const PatchGrid& grid, const FeatureParams& params) {
  params.validate_for_patch(grid.patch_size());
  const FeatureExtractor extract(params);
  FeatureMatrix m(grid.size(), kFeatureCount);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const FeatureVector v = extract(grid.patch(t));
    std::copy(v.begin(), v.end(), m.row(t).begin());
  }
  return m;
}

}  // namespace reference

}  // namespace patchknn
