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

#include "patchknn/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "patchknn/error.hpp"

namespace patchknn {

namespace {

[[noreturn]] void bad_params(const std::string& what) { throw Error(Errc::invalid_params, what); }

}  // namespace

void LbpParams::validate() const {
  if (points < 4 || points > 24) bad_params("lbp points must lie in [4, 24]");
  if (radius < 1) bad_params("lbp radius must be >= 1");
  if (bins < 2 || static_cast<std::uint64_t>(bins) > (std::uint64_t{1} << points)) {
    bad_params("lbp bins must lie in [2, 2^points]");
  }
}

void GlcmParams::validate() const {
  if (row_offset == 0 && col_offset == 0) bad_params("glcm offset must be non-zero");
  if (levels < 2 || levels > 256) bad_params("glcm levels must lie in [2, 256]");
}

int GaborParams::resolved_half_extent() const {
  return half_extent >= 0 ? half_extent : static_cast<int>(std::ceil(3.0 * sigma));
}

void GaborParams::validate() const {
  if (!(wavelength > 0) || !std::isfinite(wavelength)) bad_params("gabor wavelength must be > 0");
  if (!(sigma > 0) || !std::isfinite(sigma)) bad_params("gabor sigma must be > 0");
  if (!(gamma > 0) || !std::isfinite(gamma)) bad_params("gabor gamma must be > 0");
  if (!std::isfinite(theta) || !std::isfinite(psi)) bad_params("gabor theta and psi must be finite");
  if (bins < 2) bad_params("gabor bins must be >= 2");
  if (resolved_half_extent() > 256) bad_params("gabor kernel half-extent must be <= 256");
}

void FeatureParams::validate() const {
  lbp.validate();
  glcm.validate();
  gabor.validate();
}

void FeatureParams::validate_for_patch(std::size_t patch_size) const {
  validate();
  const auto p = static_cast<long>(patch_size);
  if (p < 2L * lbp.radius + 1) {
    bad_params("patch size " + std::to_string(p) + " too small for lbp radius " + std::to_string(lbp.radius));
  }
  if (std::abs(glcm.row_offset) >= p || std::abs(glcm.col_offset) >= p) {
    bad_params("glcm offset leaves no pixel pairs inside a " + std::to_string(p) + "-pixel patch");
  }
}

// --- histograms ---------------------------------------------------------------

std::vector<double> normalized_histogram(std::span<const double> values, int bins, double lo, double hi) {
  if (values.empty()) bad_params("histogram of an empty sequence");
  if (bins < 1) bad_params("histogram needs at least one bin");
  if (!(hi > lo)) bad_params("histogram range must satisfy hi > lo");
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double v : values) {
    const double pos = std::floor((v - lo) * scale);
    const auto bin = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    counts[bin] += 1.0;
  }
  const auto total = static_cast<double>(values.size());
  for (double& c : counts) c /= total;
  return counts;
}

double hist_energy(std::span<const double> hist) {
  double e = 0;
  for (double p : hist) e += p * p;
  return e;
}

double hist_entropy(std::span<const double> hist) {
  double h = 0;
  for (double p : hist) {
    if (p > 0) h += p * std::log2(p);
  }
  return h == 0 ? 0.0 : -h;
}

// --- local binary patterns -----------------------------------------------------

std::vector<std::pair<int, int>> lbp_offsets(const LbpParams& params) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(params.points));
  for (int p = 0; p < params.points; ++p) {
    const double angle = 2.0 * std::numbers::pi * p / params.points;
    // Rows grow downwards, so counter-clockwise means a negative row step.
    const auto dr = static_cast<int>(std::lround(-params.radius * std::sin(angle)));
    const auto dc = static_cast<int>(std::lround(params.radius * std::cos(angle)));
    out.emplace_back(dr, dc);
  }
  return out;
}

std::uint32_t lbp_code(std::uint8_t center, std::span<const std::uint8_t> neighbors) {
  std::uint32_t code = 0;
  for (std::size_t p = 0; p < neighbors.size(); ++p) {
    if (neighbors[p] >= center) code |= std::uint32_t{1} << p;
  }
  return code;
}

CodeMap lbp_map(const PatchView& patch, const LbpParams& params) {
  params.validate();
  const std::size_t r = static_cast<std::size_t>(params.radius);
  if (patch.size() < 2 * r + 1) {
    bad_params("patch of side " + std::to_string(patch.size()) + " too small for lbp radius " +
               std::to_string(params.radius));
  }
  const auto offsets = lbp_offsets(params);
  CodeMap map{patch.size() - 2 * r, patch.size() - 2 * r, {}};
  map.codes.resize(map.height * map.width);
  std::array<std::uint8_t, 32> ring{};
  const std::span<const std::uint8_t> neighbors(ring.data(), offsets.size());
  for (std::size_t i = 0; i < map.height; ++i) {
    for (std::size_t j = 0; j < map.width; ++j) {
      const std::size_t ci = i + r;
      const std::size_t cj = j + r;
      for (std::size_t p = 0; p < offsets.size(); ++p) {
        ring[p] = patch.at(static_cast<std::size_t>(static_cast<long>(ci) + offsets[p].first),
                           static_cast<std::size_t>(static_cast<long>(cj) + offsets[p].second));
      }
      map.codes[i * map.width + j] = lbp_code(patch.at(ci, cj), neighbors);
    }
  }
  return map;
}

std::pair<double, double> lbp_features(const PatchView& patch, const LbpParams& params) {
  const CodeMap map = lbp_map(patch, params);
  const std::vector<double> values(map.codes.begin(), map.codes.end());
  const auto hist =
      normalized_histogram(values, params.bins, 0.0, static_cast<double>(std::uint64_t{1} << params.points));
  return {hist_energy(hist), hist_entropy(hist)};
}

// --- gray level co-occurrence ----------------------------------------------------

namespace {

int quantize(std::uint8_t v, int levels) { return v * levels / 256; }

// Visits every in-patch pair (a, b) -> (a + da, b + db) as quantized (i, j).
template <typename Fn>
void for_each_pair(const PatchView& patch, const GlcmParams& params, Fn&& fn) {
  const long p = static_cast<long>(patch.size());
  const long a0 = std::max(0L, -static_cast<long>(params.row_offset));
  const long a1 = std::min(p, p - params.row_offset);
  const long b0 = std::max(0L, -static_cast<long>(params.col_offset));
  const long b1 = std::min(p, p - params.col_offset);
  for (long a = a0; a < a1; ++a) {
    for (long b = b0; b < b1; ++b) {
      const int i = quantize(patch.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)), params.levels);
      const int j = quantize(patch.at(static_cast<std::size_t>(a + params.row_offset),
                                      static_cast<std::size_t>(b + params.col_offset)),
                             params.levels);
      fn(i, j);
      if (params.symmetric) fn(j, i);
    }
  }
}

struct Cell {
  int i;
  int j;
  double prob;
};

// Metrics over the non-zero cells of a normalized matrix, visited in
// row-major order. Both the dense and the sparse route feed this.
template <typename Cells>
GlcmMetrics metrics_from_cells(const Cells& cells) {
  GlcmMetrics m;
  double asm_sum = 0;
  double mean_i = 0;
  double mean_j = 0;
  for (const Cell& c : cells) {
    const double d = c.i - c.j;
    m.contrast += c.prob * d * d;
    m.dissimilarity += c.prob * std::abs(d);
    m.homogeneity += c.prob / (1.0 + d * d);
    asm_sum += c.prob * c.prob;
    mean_i += c.prob * c.i;
    mean_j += c.prob * c.j;
  }
  double var_i = 0;
  double var_j = 0;
  double cov = 0;
  for (const Cell& c : cells) {
    const double di = c.i - mean_i;
    const double dj = c.j - mean_j;
    var_i += c.prob * di * di;
    var_j += c.prob * dj * dj;
    cov += c.prob * di * dj;
  }
  m.energy = std::sqrt(asm_sum);
  const double denom = std::sqrt(var_i) * std::sqrt(var_j);
  m.correlation = denom == 0 ? 1.0 : std::clamp(cov / denom, -1.0, 1.0);
  return m;
}

}  // namespace

Glcm glcm(const PatchView& patch, const GlcmParams& params) {
  params.validate();
  Glcm out{params.levels, false, std::vector<double>(static_cast<std::size_t>(params.levels) * params.levels, 0.0)};
  double total = 0;
  for_each_pair(patch, params, [&](int i, int j) {
    out.cells[static_cast<std::size_t>(i) * params.levels + j] += 1.0;
    total += 1.0;
  });
  if (total == 0) bad_params("glcm offset leaves no pixel pairs inside the patch");
  if (params.normalize) {
    for (double& c : out.cells) c /= total;
    out.normalized = true;
  }
  return out;
}

GlcmMetrics glcm_metrics(const Glcm& matrix) {
  double sum = 0;
  for (double c : matrix.cells) sum += c;
  if (!matrix.normalized || std::abs(sum - 1.0) > 1e-9) {
    throw Error(Errc::not_normalized, "glcm metrics need a normalized matrix (sum " + std::to_string(sum) + ")");
  }
  std::vector<Cell> cells;
  for (int i = 0; i < matrix.levels; ++i) {
    for (int j = 0; j < matrix.levels; ++j) {
      if (const double v = matrix.at(i, j); v != 0) cells.push_back({i, j, v});
    }
  }
  return metrics_from_cells(cells);
}

GlcmMetrics glcm_patch_metrics(const PatchView& patch, const GlcmParams& params) {
  params.validate();
  std::vector<std::uint32_t> keys;
  keys.reserve(patch.size() * patch.size() * (params.symmetric ? 2 : 1));
  for_each_pair(patch, params,
                [&](int i, int j) { keys.push_back(static_cast<std::uint32_t>(i * params.levels + j)); });
  if (keys.empty()) bad_params("glcm offset leaves no pixel pairs inside the patch");
  std::sort(keys.begin(), keys.end());
  const auto total = static_cast<double>(keys.size());
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < keys.size();) {
    std::size_t run = k;
    while (run < keys.size() && keys[run] == keys[k]) ++run;
    const auto key = static_cast<int>(keys[k]);
    cells.push_back({key / params.levels, key % params.levels, static_cast<double>(run - k) / total});
    k = run;
  }
  return metrics_from_cells(cells);
}

// --- gabor -------------------------------------------------------------------------

GaborKernel gabor_kernel(const GaborParams& params) {
  params.validate();
  GaborKernel k;
  k.half_extent = params.resolved_half_extent();
  const int h = k.half_extent;
  const std::size_t n = static_cast<std::size_t>(k.side()) * k.side();
  k.real.resize(n);
  k.imag.resize(n);
  const double c = std::cos(params.theta);
  const double s = std::sin(params.theta);
  const double two_sigma_sq = 2.0 * params.sigma * params.sigma;
  const double gamma_sq = params.gamma * params.gamma;
  for (int v = -h; v <= h; ++v) {
    for (int u = -h; u <= h; ++u) {
      const double xr = u * c + v * s;
      const double yr = -u * s + v * c;
      const double envelope = std::exp(-(xr * xr + gamma_sq * yr * yr) / two_sigma_sq);
      const double phase = 2.0 * std::numbers::pi * xr / params.wavelength + params.psi;
      const std::size_t idx = static_cast<std::size_t>(v + h) * k.side() + (u + h);
      k.real[idx] = envelope * std::cos(phase);
      k.imag[idx] = envelope * std::sin(phase);
    }
  }
  return k;
}

namespace {

std::vector<double> centered_pixels(const PatchView& patch, bool remove_dc) {
  const std::size_t p = patch.size();
  std::vector<double> px(p * p);
  double sum = 0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      px[i * p + j] = patch.at(i, j);
      sum += px[i * p + j];
    }
  }
  if (remove_dc) {
    const double mean = sum / static_cast<double>(px.size());
    for (double& v : px) v -= mean;
  }
  return px;
}

std::pair<double, double> magnitude_features(const std::vector<double>& magnitude, int bins) {
  const double peak = *std::max_element(magnitude.begin(), magnitude.end());
  if (peak == 0) return {1.0, 0.0};
  const auto hist = normalized_histogram(magnitude, bins, 0.0, peak);
  return {hist_energy(hist), hist_entropy(hist)};
}

}  // namespace

GaborFilter::GaborFilter(const GaborParams& params) : params_(params), kernel_(gabor_kernel(params)) {
  const int h = kernel_.half_extent;
  const auto side = static_cast<std::size_t>(kernel_.side());
  h_re_.resize(side);
  h_im_.resize(side);
  g_re_.resize(side);
  g_im_.resize(side);
  // K(0, 0) = e^{i psi} has unit modulus, so dividing by it is always safe.
  const double c_re = kernel_.re(0, 0);
  const double c_im = kernel_.im(0, 0);
  for (int t = -h; t <= h; ++t) {
    const auto idx = static_cast<std::size_t>(t + h);
    h_re_[idx] = kernel_.re(t, 0);
    h_im_[idx] = kernel_.im(t, 0);
    const double a = kernel_.re(0, t);
    const double b = kernel_.im(0, t);
    // (a + ib) / (c_re + i c_im) with |c| = 1
    g_re_[idx] = a * c_re + b * c_im;
    g_im_[idx] = b * c_re - a * c_im;
  }
  double worst = 0;
  for (int v = -h; v <= h; ++v) {
    for (int u = -h; u <= h; ++u) {
      const auto iu = static_cast<std::size_t>(u + h);
      const auto iv = static_cast<std::size_t>(v + h);
      const double re = h_re_[iu] * g_re_[iv] - h_im_[iu] * g_im_[iv];
      const double im = h_re_[iu] * g_im_[iv] + h_im_[iu] * g_re_[iv];
      worst = std::max({worst, std::abs(re - kernel_.re(u, v)), std::abs(im - kernel_.im(u, v))});
    }
  }
  separable_ = worst <= 1e-12;
}

std::vector<double> GaborFilter::magnitude(const PatchView& patch) const {
  if (!separable_) return reference::gabor_magnitude_direct(patch, params_);

  const auto p = static_cast<long>(patch.size());
  const long h = kernel_.half_extent;
  const std::vector<double> px = centered_pixels(patch, params_.remove_dc);
  const auto n = static_cast<std::size_t>(p * p);

  // Horizontal pass: T(r, c) = sum_u h(u) P(r, c - u).
  std::vector<double> t_re(n, 0.0);
  std::vector<double> t_im(n, 0.0);
  for (long r = 0; r < p; ++r) {
    for (long c = 0; c < p; ++c) {
      double acc_re = 0;
      double acc_im = 0;
      const long u0 = std::max(-h, c - (p - 1));
      const long u1 = std::min(h, c);
      for (long u = u0; u <= u1; ++u) {
        const double v = px[static_cast<std::size_t>(r * p + c - u)];
        acc_re += h_re_[static_cast<std::size_t>(u + h)] * v;
        acc_im += h_im_[static_cast<std::size_t>(u + h)] * v;
      }
      t_re[static_cast<std::size_t>(r * p + c)] = acc_re;
      t_im[static_cast<std::size_t>(r * p + c)] = acc_im;
    }
  }
  // Vertical pass: R(r, c) = sum_v g(v) T(r - v, c).
  std::vector<double> out(n);
  for (long r = 0; r < p; ++r) {
    const long v0 = std::max(-h, r - (p - 1));
    const long v1 = std::min(h, r);
    for (long c = 0; c < p; ++c) {
      double acc_re = 0;
      double acc_im = 0;
      for (long v = v0; v <= v1; ++v) {
        const auto src = static_cast<std::size_t>((r - v) * p + c);
        const auto gi = static_cast<std::size_t>(v + h);
        acc_re += g_re_[gi] * t_re[src] - g_im_[gi] * t_im[src];
        acc_im += g_re_[gi] * t_im[src] + g_im_[gi] * t_re[src];
      }
      out[static_cast<std::size_t>(r * p + c)] = std::sqrt(acc_re * acc_re + acc_im * acc_im);
    }
  }
  return out;
}

std::pair<double, double> GaborFilter::features(const PatchView& patch) const {
  return magnitude_features(magnitude(patch), params_.bins);
}

std::vector<double> gabor_magnitude(const PatchView& patch, const GaborParams& params) {
  return GaborFilter(params).magnitude(patch);
}

std::pair<double, double> gabor_features(const PatchView& patch, const GaborParams& params) {
  return GaborFilter(params).features(patch);
}

namespace reference {

std::vector<double> gabor_magnitude_direct(const PatchView& patch, const GaborParams& params) {
  const GaborKernel k = gabor_kernel(params);
  const auto p = static_cast<long>(patch.size());
  const long h = k.half_extent;
  const std::vector<double> px = centered_pixels(patch, params.remove_dc);
  std::vector<double> out(static_cast<std::size_t>(p * p));
  for (long r = 0; r < p; ++r) {
    for (long c = 0; c < p; ++c) {
      double acc_re = 0;
      double acc_im = 0;
      for (long v = -h; v <= h; ++v) {
        const long sr = r - v;
        if (sr < 0 || sr >= p) continue;
        for (long u = -h; u <= h; ++u) {
          const long sc = c - u;
          if (sc < 0 || sc >= p) continue;
          const double val = px[static_cast<std::size_t>(sr * p + sc)];
          acc_re += k.re(static_cast<int>(u), static_cast<int>(v)) * val;
          acc_im += k.im(static_cast<int>(u), static_cast<int>(v)) * val;
        }
      }
      out[static_cast<std::size_t>(r * p + c)] = std::sqrt(acc_re * acc_re + acc_im * acc_im);
    }
  }
  return out;
}

}  // namespace reference

// --- assembly ------------------------------------------------------------------------

FeatureExtractor::FeatureExtractor(const FeatureParams& params) : params_(params), gabor_(params.gabor) {
  params_.validate();
}

FeatureVector FeatureExtractor::operator()(const PatchView& patch) const {
  const auto [lbp_energy, lbp_entropy] = lbp_features(patch, params_.lbp);
  const GlcmMetrics g = glcm_patch_metrics(patch, params_.glcm);
  const auto [gabor_energy, gabor_entropy] = gabor_.features(patch);
  return {lbp_energy,    lbp_entropy, g.contrast,   g.dissimilarity, g.homogeneity,
          g.energy,      g.correlation, gabor_energy, gabor_entropy};
}

FeatureVector feature_vector(const PatchView& patch, const FeatureParams& params) {
  return FeatureExtractor(params)(patch);
}

}  // namespace patchknn
