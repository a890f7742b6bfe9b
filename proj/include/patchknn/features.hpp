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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "patchknn/patch_grid.hpp"

namespace patchknn {

inline constexpr std::size_t kFeatureCount = 9;

/// Order of the columns of every feature vector.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "lbp_energy",  "lbp_entropy",      "glcm_contrast",    "glcm_dissimilarity", "glcm_homogeneity",
    "glcm_energy", "glcm_correlation", "gabor_energy",     "gabor_entropy",
};

using FeatureVector = std::array<double, kFeatureCount>;

struct LbpParams {
  int points = 8;  // P
  int radius = 1;  // R
  int bins = 8;
  void validate() const;
};

struct GlcmParams {
  int row_offset = 0;  // delta a
  int col_offset = 1;  // delta b
  int levels = 256;
  bool symmetric = false;
  bool normalize = true;
  void validate() const;
};

struct GaborParams {
  double wavelength = 8.0;  // lambda
  double theta = 0.0;
  double psi = 0.0;
  double sigma = 4.0;
  double gamma = 0.5;
  int half_extent = -1;  // < 0 means ceil(3 sigma)
  int bins = 8;
  /// Subtract the patch mean before filtering, so flat patches give a zero response.
  bool remove_dc = true;

  int resolved_half_extent() const;
  void validate() const;
};

struct FeatureParams {
  LbpParams lbp;
  GlcmParams glcm;
  GaborParams gabor;
  void validate() const;
  /// Throws Error(Errc::invalid_params) if a patch of side p cannot feed every extractor.
  void validate_for_patch(std::size_t patch_size) const;
};

// --- histograms -----------------------------------------------------------

/// Uniform bins over [lo, hi]; a value equal to hi lands in the last bin and
/// out-of-range values are clamped to the end bins. Entries sum to 1.
std::vector<double> normalized_histogram(std::span<const double> values, int bins, double lo, double hi);

double hist_energy(std::span<const double> hist);
/// Shannon entropy in bits.
double hist_entropy(std::span<const double> hist);

// --- local binary patterns -------------------------------------------------

/// Sampling offsets (row, col) for neighbor p = 0..P-1: east first, then
/// counter-clockwise, rounded to the nearest pixel.
std::vector<std::pair<int, int>> lbp_offsets(const LbpParams& params);

/// sum_p s(g_p - g_c) * 2^p with s(v) = 1 iff v >= 0.
std::uint32_t lbp_code(std::uint8_t center, std::span<const std::uint8_t> neighbors);

struct CodeMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint32_t> codes;
  std::uint32_t at(std::size_t i, std::size_t j) const { return codes[i * width + j]; }
};

/// Codes over interior pixels only: output is (p - 2R) x (p - 2R).
CodeMap lbp_map(const PatchView& patch, const LbpParams& params);

std::pair<double, double> lbp_features(const PatchView& patch, const LbpParams& params);

// --- gray level co-occurrence ----------------------------------------------

struct Glcm {
  int levels = 0;
  bool normalized = false;
  std::vector<double> cells;  // levels x levels, row = reference value
  double at(int i, int j) const { return cells[static_cast<std::size_t>(i) * levels + j]; }
};

struct GlcmMetrics {
  double contrast = 0;
  double dissimilarity = 0;
  double homogeneity = 0;
  double energy = 0;
  double correlation = 0;
};

/// Dense co-occurrence matrix of pixel pairs (a, b) -> (a + da, b + db).
Glcm glcm(const PatchView& patch, const GlcmParams& params);

/// Haralick metrics of a normalized matrix. Correlation is 1 when either
/// marginal has zero variance.
GlcmMetrics glcm_metrics(const Glcm& matrix);

/// Same metrics computed from the sorted list of co-occurring pairs, without
/// materializing the levels x levels matrix.
GlcmMetrics glcm_patch_metrics(const PatchView& patch, const GlcmParams& params);

// --- gabor -------------------------------------------------------------------

struct GaborKernel {
  int half_extent = 0;
  std::vector<double> real;  // (2h+1)^2, indexed [(v + h) * side + (u + h)]
  std::vector<double> imag;

  int side() const noexcept { return 2 * half_extent + 1; }
  /// u is the horizontal offset (column), v the vertical offset (row).
  double re(int u, int v) const { return real[static_cast<std::size_t>(v + half_extent) * side() + u + half_extent]; }
  double im(int u, int v) const { return imag[static_cast<std::size_t>(v + half_extent) * side() + u + half_extent]; }
};

GaborKernel gabor_kernel(const GaborParams& params);

/// Precomputed complex filter. When the kernel factors as h(u) * g(v) to
/// within 1e-12 the response is computed in two 1D passes.
class GaborFilter {
 public:
  explicit GaborFilter(const GaborParams& params);

  const GaborKernel& kernel() const noexcept { return kernel_; }
  bool separable() const noexcept { return separable_; }

  /// Per-pixel magnitude of the zero-padded convolution, same size as the patch.
  std::vector<double> magnitude(const PatchView& patch) const;
  std::pair<double, double> features(const PatchView& patch) const;

 private:
  GaborParams params_;
  GaborKernel kernel_;
  bool separable_ = false;
  std::vector<double> h_re_, h_im_;  // horizontal factor, u = -h..h
  std::vector<double> g_re_, g_im_;  // vertical factor, v = -h..h
};

std::vector<double> gabor_magnitude(const PatchView& patch, const GaborParams& params);

/// (energy, entropy) of the magnitude histogram over [0, max magnitude].
std::pair<double, double> gabor_features(const PatchView& patch, const GaborParams& params);

// --- assembly ----------------------------------------------------------------

/// Holds prepared per-extractor state so repeated calls skip kernel setup.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const FeatureParams& params);
  const FeatureParams& params() const noexcept { return params_; }
  FeatureVector operator()(const PatchView& patch) const;

 private:
  FeatureParams params_;
  GaborFilter gabor_;
};

FeatureVector feature_vector(const PatchView& patch, const FeatureParams& params);

namespace reference {

/// Direct 2D convolution; the oracle for the separable path.
std::vector<double> gabor_magnitude_direct(const PatchView& patch, const GaborParams& params);

}  // namespace reference

}  // namespace patchknn
