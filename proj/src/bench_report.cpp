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

#include "patchknn/bench_report.hpp"

#include <algorithm>
#include <chrono>

#include "patchknn/error.hpp"

namespace patchknn {

double median(std::vector<double> samples) {
  if (samples.empty()) throw Error(Errc::invalid_params, "median of an empty sample");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

namespace {

// Below steady_clock resolution a query would report an infinite speed.
constexpr double kMinElapsed = 1e-9;

double time_search(const SearchIndex& index, const SearchIndex::Request& request, std::vector<Neighbor>* out) {
  const auto start = std::chrono::steady_clock::now();
  auto found = index.search(request);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  if (out != nullptr) *out = std::move(found);
  return std::max(elapsed.count(), kMinElapsed);
}

MethodTiming measure(const SearchIndex& index, SearchIndex::Request request, std::size_t repeats) {
  MethodTiming timing;
  timing.method = request.method;
  timing.metric = request.resolved_metric();
  std::vector<double> samples;
  samples.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    samples.push_back(time_search(index, request, r == 0 ? &timing.neighbors : nullptr));
  }
  timing.elapsed_s = median(std::move(samples));
  timing.d_max = timing.neighbors.empty() ? 0.0 : timing.neighbors.back().distance;
  timing.speed = timing.d_max / timing.elapsed_s;

  const std::size_t k = request.k;
  for (std::size_t i = 1; i <= std::min(k, timing.neighbors.size()); ++i) {
    request.k = i;
    const double t = time_search(index, request, nullptr);
    timing.curve.push_back({timing.neighbors[i - 1].distance, t});
  }
  return timing;
}

nlohmann::json method_json(const MethodTiming& m, double speedup) {
  nlohmann::json curve = nlohmann::json::array();
  for (const CurvePoint& p : m.curve) curve.push_back({{"distance", p.distance}, {"time_s", p.time_s}});
  nlohmann::json ids = nlohmann::json::array();
  for (const Neighbor& n : m.neighbors) ids.push_back({{"id", n.id}, {"distance", n.distance}});
  return {
      {"method", to_string(m.method)}, {"metric", to_string(m.metric)}, {"elapsed_s", m.elapsed_s},
      {"d_max", m.d_max},             {"speed", m.speed},              {"speedup", speedup},
      {"neighbors", std::move(ids)},  {"curve", std::move(curve)},
  };
}

}  // namespace

BenchReport run_benchmark(const SearchIndex& index, std::size_t query_id, std::size_t k, std::size_t repeats) {
  if (repeats < 1) throw Error(Errc::invalid_params, "repeats must be >= 1");
  if (k < 1) throw Error(Errc::invalid_params, "k must be >= 1");
  BenchReport report;
  report.query_id = query_id;
  report.k = k;
  report.repeats = repeats;
  report.brute = measure(index, {query_id, k, Method::brute, Metric::cosine, false}, repeats);
  report.kdtree = measure(index, {query_id, k, Method::kdtree, Metric::euclidean, false}, repeats);
  report.speedup = report.brute.elapsed_s / report.kdtree.elapsed_s;
  const auto euclid = index.search({query_id, k, Method::brute, Metric::euclidean, false});
  report.euclidean_agreement = euclid == report.kdtree.neighbors;
  return report;
}

nlohmann::json to_json(const BenchReport& report) {
  return {
      {"query_id", report.query_id},
      {"k", report.k},
      {"repeats", report.repeats},
      {"methods", {method_json(report.brute, 1.0), method_json(report.kdtree, report.speedup)}},
      {"speedup", report.speedup},
      {"euclidean_agreement", report.euclidean_agreement},
  };
}

}  // namespace patchknn
