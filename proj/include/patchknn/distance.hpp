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
#include <string_view>

namespace patchknn {

enum class Metric { cosine, euclidean };

std::string_view to_string(Metric metric) noexcept;
/// Throws Error(Errc::invalid_params) for anything but "cosine" / "euclidean".
Metric parse_metric(std::string_view name);

double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// 1 - cos(angle), clamped to [0, 2]. Both vectors zero -> 0; exactly one zero -> 1.
double cosine_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Cosine distance from a precomputed dot product and squared norms. Gives
/// the same bits as cosine_distance for the same inputs.
double cosine_distance_from(double dot_ab, double norm_sq_a, double norm_sq_b) noexcept;

double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept;
double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept;

double distance(Metric metric, std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace patchknn
