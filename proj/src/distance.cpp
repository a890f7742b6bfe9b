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

#include "patchknn/distance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patchknn/error.hpp"

namespace patchknn {

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::cosine;
  if (name == "euclidean") return Metric::euclidean;
  throw Error(Errc::invalid_params, "unknown metric '" + std::string(name) + "' (expected cosine or euclidean)");
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine_distance_from(double dot_ab, double norm_sq_a, double norm_sq_b) noexcept {
  const bool zero_a = norm_sq_a == 0;
  const bool zero_b = norm_sq_b == 0;
  if (zero_a && zero_b) return 0.0;
  if (zero_a || zero_b) return 1.0;
  // sqrt(x * x) == x exactly, so a vector against itself gives similarity 1.
  const double similarity = std::clamp(dot_ab / std::sqrt(norm_sq_a * norm_sq_b), -1.0, 1.0);
  return 1.0 - similarity;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return cosine_distance_from(dot(a, b), dot(a, a), dot(b, b));
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return std::sqrt(squared_euclidean(a, b));
}

double distance(Metric metric, std::span<const double> a, std::span<const double> b) noexcept {
  return metric == Metric::cosine ? cosine_distance(a, b) : euclidean_distance(a, b);
}

}  // namespace patchknn
