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

#include <nlohmann/json.hpp>

#include "patchknn/query.hpp"

namespace patchknn {

/// One (distance, time) sample: the i-th neighbor's distance against the
/// time taken by a k = i query.
struct CurvePoint {
  double distance = 0;
  double time_s = 0;
};

struct MethodTiming {
  Method method = Method::brute;
  Metric metric = Metric::cosine;
  double elapsed_s = 0;  // t_max: median query time over the repeats
  double d_max = 0;      // distance of the k-th neighbor
  double speed = 0;      // d_max / t_max
  std::vector<Neighbor> neighbors;
  std::vector<CurvePoint> curve;
};

struct BenchReport {
  std::size_t query_id = 0;
  std::size_t k = 0;
  std::size_t repeats = 0;
  MethodTiming brute;   // cosine, as in the original comparison
  MethodTiming kdtree;  // euclidean
  double speedup = 0;   // brute elapsed / kd-tree elapsed
  /// kd-tree result equals brute force run with the euclidean metric.
  bool euclidean_agreement = false;
};

/// Times both backends on the same query. The kd-tree is already built and
/// its build time is not counted.
BenchReport run_benchmark(const SearchIndex& index, std::size_t query_id, std::size_t k, std::size_t repeats = 1);

nlohmann::json to_json(const BenchReport& report);

/// Median of a non-empty sample (mean of the two middle values for even sizes).
double median(std::vector<double> samples);

}  // namespace patchknn
