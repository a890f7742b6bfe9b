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

// Acceptance gate: one PASS/FAIL line per primary criterion. Exit status is
// the number of failed criteria.

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "patchknn/bench_report.hpp"
#include "patchknn/brute_force.hpp"
#include "patchknn/feature_matrix.hpp"
#include "patchknn/features.hpp"
#include "patchknn/index_store.hpp"
#include "patchknn/kd_tree.hpp"
#include "patchknn/query.hpp"
#include "patchknn/service.hpp"
#include "test_support.hpp"

using namespace patchknn;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and sizes.
constexpr std::size_t kImageHeight = 225;
constexpr std::size_t kImageWidth = 260;
constexpr std::size_t kPatchSize = 32;
constexpr std::size_t kExpectedPatches = 44426;
constexpr double kMaxBuildSeconds = 120.0;
constexpr std::size_t kExactnessMatrices = 200;
constexpr std::size_t kMaxExactnessRows = 5000;
constexpr std::size_t kSpeedQueries = 51;
constexpr double kMinSpeedup = 3.0;
constexpr int kPropertyCases = 1000;
constexpr double kSumTolerance = 1e-9;
constexpr double kOracleTolerance = 1e-12;
constexpr std::size_t kRoundTripCoords = 10000;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_++ < 3) first_ += (first_.empty() ? "" : "; ") + what;
  }
  std::size_t failures() const { return failures_; }
  Outcome outcome(std::string summary) const {
    if (failures_ == 0) return {true, std::move(summary)};
    return {false, std::to_string(failures_) + " failure(s): " + first_};
  }

 private:
  std::size_t failures_ = 0;
  std::string first_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << std::fixed << v;
  return os.str();
}

// --- shared fixture -----------------------------------------------------------

struct FullScale {
  GrayImage image{1, 1};
  FeatureMatrix raw;
  FeatureMatrix normalized;
  GridShape grid;
  double build_seconds = 0;
};

FullScale& full_scale() {
  static FullScale s = [] {
    FullScale s;
    s.image = testing::texture_image(kImageHeight, kImageWidth);
    const auto start = Clock::now();
    const PatchGrid grid(s.image, kPatchSize);
    s.raw = build_feature_matrix(grid, FeatureParams{});
    s.normalized = normalize_minmax(s.raw);
    s.build_seconds = seconds_since(start);
    s.grid = grid.shape();
    return s;
  }();
  return s;
}

// --- oracles --------------------------------------------------------------------

std::vector<Neighbor> oracle_knn(const FeatureMatrix& m, std::span<const double> q, std::size_t k) {
  std::vector<Neighbor> all;
  all.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0;
    for (std::size_t d = 0; d < q.size(); ++d) s += (q[d] - m.at(r, d)) * (q[d] - m.at(r, d));
    all.push_back({r, std::sqrt(s)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) { return a.distance < b.distance; });
  all.resize(std::min(k, all.size()));
  return all;
}

GlcmMetrics oracle_checkerboard_metrics() {
  // 4x4 board of 0/1 with horizontal offset: 12 pairs, 6 of (0,1) and 6 of (1,0).
  const double p01 = 6.0 / 12.0;
  const double p10 = 6.0 / 12.0;
  GlcmMetrics m;
  m.contrast = p01 * 1 + p10 * 1;
  m.dissimilarity = p01 * 1 + p10 * 1;
  m.homogeneity = p01 / 2 + p10 / 2;
  m.energy = std::sqrt(p01 * p01 + p10 * p10);
  const double mi = p10 * 1;  // reference value 1 appears in the (1,0) pairs
  const double mj = p01 * 1;
  const double vi = p01 * (0 - mi) * (0 - mi) + p10 * (1 - mi) * (1 - mi);
  const double vj = p01 * (1 - mj) * (1 - mj) + p10 * (0 - mj) * (0 - mj);
  const double cov = p01 * (0 - mi) * (1 - mj) + p10 * (1 - mi) * (0 - mj);
  m.correlation = cov / std::sqrt(vi * vj);
  return m;
}

// --- criteria -------------------------------------------------------------------

Outcome patch_count() {
  const FullScale& s = full_scale();
  Check c;
  c.expect(s.grid.patch_count() == kExpectedPatches, "grid has " + std::to_string(s.grid.patch_count()) + " patches");
  c.expect(s.raw.rows() == kExpectedPatches && s.raw.cols() == 9,
           "matrix is " + std::to_string(s.raw.rows()) + "x" + std::to_string(s.raw.cols()));
  c.expect(s.build_seconds < kMaxBuildSeconds, "build took " + fmt(s.build_seconds) + " s");
  return c.outcome(std::to_string(s.raw.rows()) + "x" + std::to_string(s.raw.cols()) + " matrix in " +
                   fmt(s.build_seconds) + " s (limit " + fmt(kMaxBuildSeconds, 0) + " s)");
}

Outcome kd_exactness() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> rows(1, kMaxExactnessRows);
  std::uniform_int_distribution<int> lattice(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Check c;
  std::size_t queries = 0;
  for (std::size_t trial = 0; trial < kExactnessMatrices; ++trial) {
    // Half the matrices force distance ties: a coarse lattice, or rows
    // repeated from a small pool.
    const std::size_t n = trial < 4 ? trial + 1 : rows(rng);
    FeatureMatrix m(n, 9);
    if (trial % 4 == 2) {
      const FeatureMatrix pool = testing::random_matrix(std::max<std::size_t>(1, n / 8), 9, rng);
      std::uniform_int_distribution<std::size_t> pick(0, pool.rows() - 1);
      for (std::size_t r = 0; r < n; ++r) {
        const auto src = pool.row(pick(rng));
        std::copy(src.begin(), src.end(), m.row(r).begin());
      }
    } else {
      for (double& v : m.values()) v = trial % 4 == 3 ? lattice(rng) / 2.0 : u(rng);
    }
    const KdTree tree = KdTree::build(m);
    for (int q = 0; q < 4; ++q) {
      std::vector<double> query(9);
      if (q % 2 == 0) {
        const auto row = m.row(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
        query.assign(row.begin(), row.end());
      } else {
        for (double& v : query) v = u(rng);
      }
      for (std::size_t k : {1, 5, 17}) {
        ++queries;
        c.expect(tree.knn(query, k) == oracle_knn(m, query, k),
                 "matrix " + std::to_string(trial) + " (" + std::to_string(n) + " rows), k=" + std::to_string(k));
      }
    }
  }
  return c.outcome(std::to_string(kExactnessMatrices) + " matrices, " + std::to_string(queries) +
                   " queries, 0 mismatches");
}

Outcome speed_ordering() {
  const FullScale& s = full_scale();
  const SearchIndex index(s.normalized, s.grid);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, s.grid.patch_count() - 1);
  std::vector<double> brute_times;
  std::vector<double> kd_times;
  Check c;
  auto timed = [&](const SearchIndex::Request& r, std::vector<Neighbor>* out) {
    const auto start = Clock::now();
    *out = index.search(r);
    return std::max(seconds_since(start), 1e-9);
  };
  for (std::size_t i = 0; i < kSpeedQueries; ++i) {
    const std::size_t t = pick(rng);
    std::vector<Neighbor> bf;
    std::vector<Neighbor> kd;
    brute_times.push_back(timed({t, 5, Method::brute, Metric::cosine, false}, &bf));
    kd_times.push_back(timed({t, 5, Method::kdtree, Metric::euclidean, false}, &kd));
    c.expect(kd == index.search({t, 5, Method::brute, Metric::euclidean, false}), "kd != brute euclidean at " +
                                                                                  std::to_string(t));
  }
  const double brute = median(brute_times);
  const double kd = median(kd_times);
  const double speedup = brute / kd;
  c.expect(speedup >= kMinSpeedup, "speedup " + fmt(speedup, 2) + "x below " + fmt(kMinSpeedup, 1) + "x");
  return c.outcome("median brute " + fmt(brute * 1e3, 3) + " ms, kd-tree " + fmt(kd * 1e3, 4) + " ms, speedup " +
                   fmt(speedup, 1) + "x over " + std::to_string(kSpeedQueries) + " queries (floor " +
                   fmt(kMinSpeedup, 1) + "x)");
}

Outcome feature_invariants() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> side(4, 32);
  std::uniform_int_distribution<int> top(0, 255);
  std::uniform_int_distribution<int> offset(-2, 2);
  Check c;
  const LbpParams lbp;
  std::size_t histograms = 0;
  for (int trial = 0; trial < kPropertyCases; ++trial) {
    const std::size_t p = side(rng);
    const int hi = top(rng);
    const GrayImage img = testing::random_image(p, p, rng, 0, hi);
    const PatchView view = PatchView::whole(img);

    // LBP codes and histogram.
    const CodeMap codes = lbp_map(view, lbp);
    std::vector<double> values;
    for (auto code : codes.codes) {
      c.expect(code <= 255, "lbp code " + std::to_string(code));
      values.push_back(code);
    }
    std::vector<std::vector<double>> hists;
    hists.push_back(normalized_histogram(values, 8, 0.0, 256.0));
    const auto gabor = gabor_magnitude(view, GaborParams{});
    const double gmax = *std::max_element(gabor.begin(), gabor.end());
    if (gmax > 0) hists.push_back(normalized_histogram(gabor, 8, 0.0, gmax));
    for (const auto& h : hists) {
      ++histograms;
      double sum = 0;
      for (double x : h) sum += x;
      c.expect(std::abs(sum - 1) <= kSumTolerance, "histogram sum " + std::to_string(sum));
      const double e = hist_energy(h);
      const double s = hist_entropy(h);
      c.expect(e >= 0.125 - 1e-15 && e <= 1.0, "energy " + std::to_string(e));
      c.expect(s >= 0.0 && s <= 3.0 + 1e-12, "entropy " + std::to_string(s));
    }

    // GLCM normalization and correlation range.
    GlcmParams gp;
    gp.row_offset = offset(rng);
    gp.col_offset = offset(rng);
    if (gp.row_offset == 0 && gp.col_offset == 0) gp.col_offset = 1;
    const Glcm g = glcm(view, gp);
    double sum = 0;
    for (double x : g.cells) sum += x;
    c.expect(std::abs(sum - 1) <= kSumTolerance, "glcm sum " + std::to_string(sum));
    const GlcmMetrics m = glcm_metrics(g);
    c.expect(m.correlation >= -1 && m.correlation <= 1, "correlation " + std::to_string(m.correlation));

    // LBP invariance under a constant intensity shift.
    const int shift = std::uniform_int_distribution<int>(0, 255 - hi)(rng);
    GrayImage shifted = img;
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t col = 0; col < p; ++col) shifted.at(r, col) = static_cast<std::uint8_t>(img.at(r, col) + shift);
    }
    c.expect(lbp_map(PatchView::whole(shifted), lbp).codes == codes.codes, "lbp changed under shift " +
                                                                               std::to_string(shift));
  }
  return c.outcome(std::to_string(kPropertyCases) + " random patches, " + std::to_string(histograms) +
                   " histograms, 0 violations");
}

Outcome hand_oracles() {
  Check c;
  const FeatureVector expected = {1, 0, 0, 0, 1, 1, 1, 1, 0};
  for (int value : {0, 37, 128, 255}) {
    const GrayImage flat(32, 32, static_cast<std::uint8_t>(value));
    c.expect(feature_vector(PatchView::whole(flat), FeatureParams{}) == expected,
             "constant " + std::to_string(value) + " vector differs");
  }
  GrayImage board(4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t col = 0; col < 4; ++col) board.at(r, col) = (r + col) % 2 == 0 ? 0 : 1;
  }
  const GlcmMetrics oracle = oracle_checkerboard_metrics();
  const GlcmMetrics closed{1, 1, 0.5, std::sqrt(0.5), -1};
  for (const GlcmMetrics& m : {glcm_metrics(glcm(PatchView::whole(board), GlcmParams{})),
                               glcm_patch_metrics(PatchView::whole(board), GlcmParams{})}) {
    for (const GlcmMetrics* want : {&oracle, &closed}) {
      c.expect(std::abs(m.contrast - want->contrast) <= kOracleTolerance, "contrast " + std::to_string(m.contrast));
      c.expect(std::abs(m.dissimilarity - want->dissimilarity) <= kOracleTolerance, "dissimilarity");
      c.expect(std::abs(m.homogeneity - want->homogeneity) <= kOracleTolerance, "homogeneity");
      c.expect(std::abs(m.energy - want->energy) <= kOracleTolerance, "energy");
      c.expect(std::abs(m.correlation - want->correlation) <= kOracleTolerance, "correlation");
    }
  }
  return c.outcome("constant patch exact; checkerboard (1, 1, 0.5, sqrt(0.5), -1) within 1e-12");
}

Outcome round_trips() {
  Check c;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> dim(2, 400);
  for (std::size_t i = 0; i < kRoundTripCoords; ++i) {
    const std::size_t h = dim(rng);
    const std::size_t w = dim(rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(2, std::min(h, w))(rng);
    const GridShape g = GridShape::make(h, w, p);
    const std::size_t x = std::uniform_int_distribution<std::size_t>(0, g.grid_height() - 1)(rng);
    const std::size_t y = std::uniform_int_distribution<std::size_t>(0, g.grid_width() - 1)(rng);
    const std::size_t t = patch_id(static_cast<std::int64_t>(x), static_cast<std::int64_t>(y), g);
    const PatchCoords back = patch_coords(t, g);
    c.expect(back.x == x && back.y == y && t < g.patch_count(), "coords (" + std::to_string(x) + ", " +
                                                                    std::to_string(y) + ")");
  }

  const FullScale& s = full_scale();
  const auto dir = testing::scratch_dir("acceptance_store");
  save_index(dir / "full.idx", s.normalized, s.grid);
  const StoredIndex back = load_index(dir / "full.idx");
  c.expect(back.matrix == s.normalized, "loaded matrix differs");
  c.expect(std::filesystem::file_size(dir / "full.idx") == index_header_size(9) + kExpectedPatches * 72,
           "index file size");
  c.expect(normalize_minmax(s.normalized) == s.normalized, "normalize not idempotent at full scale");
  for (int trial = 0; trial < 100; ++trial) {
    const FeatureMatrix once = normalize_minmax(testing::random_matrix(1 + trial * 7, 9, rng));
    c.expect(normalize_minmax(once) == once, "normalize not idempotent on random matrix");
  }
  return c.outcome(std::to_string(kRoundTripCoords) + " coordinates; 44426x9 save/load bitwise; normalize idempotent");
}

Outcome cosine_contract() {
  Check c;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> dims(1, 16);
  for (int trial = 0; trial < kPropertyCases; ++trial) {
    const std::size_t d = dims(rng);
    std::vector<double> a(d), b(d);
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    if (dot(a, a) > 0) c.expect(cosine_distance(a, a) == 0.0, "d(a,a) != 0");
    const double ab = cosine_distance(a, b);
    c.expect(ab == cosine_distance(b, a), "asymmetric");
    c.expect(ab >= 0.0 && ab <= 2.0, "out of range " + std::to_string(ab));
    if (d >= 2) {
      std::vector<double> e1(d, 0.0), e2(d, 0.0);
      const std::size_t i = std::uniform_int_distribution<std::size_t>(0, d - 1)(rng);
      const std::size_t j = (i + 1 + std::uniform_int_distribution<std::size_t>(0, d - 2)(rng)) % d;
      e1[i] = 1;
      e2[j] = 1;
      c.expect(cosine_distance(e1, e2) == 1.0, "orthogonal units not at distance 1");
    }
  }
  return c.outcome(std::to_string(kPropertyCases) + " random pairs: self 0, symmetric, in [0, 2], orthogonal 1");
}

Outcome primary_suite() {
  Check c;
  const auto dir = testing::scratch_dir("acceptance_suite");
  const std::string image = (dir / "tex.png").string();
  const std::string index = (dir / "tex.idx").string();
  write_png(image, to_raster(full_scale().image));

  auto cli = [&](std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "patchknn");
    std::ostringstream o, e;
    const int code = run_cli(args, o, e);
    if (out != nullptr) *out = o.str();
    return code;
  };
  c.expect(cli({"index", image, "--patch-size", "32", "-o", index}) == 0, "cli index failed");
  std::string out;
  c.expect(cli({"query", "--index", index, "--x", "113", "--y", "104", "--k", "5"}, &out) == 0, "cli query failed");
  if (c.failures() == 0) {
    const auto j = nlohmann::json::parse(out);
    c.expect(j["query_id"] == 25981 && j["neighbors"].size() == 5 && j["neighbors"][0]["id"] == 25981,
             "cli query result");
  }
  c.expect(cli({"bench", "--index", index, "--id", "25981", "--repeat", "3"}, &out) == 0, "cli bench failed");

  Service service;
  const int port = service.bind("127.0.0.1", 0);
  c.expect(port > 0, "service bind failed");
  if (port > 0) {
    std::thread server([&] { service.run(); });
    service.wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120);
    const auto png = encode_png(to_raster(testing::texture_image(64, 64, 3)));
    const auto up = client.Post("/images?patch_size=16", std::string(png.begin(), png.end()), "image/png");
    c.expect(up && up->status == 202, "service upload");
    if (up && up->status == 202) {
      const std::string id = nlohmann::json::parse(up->body)["image_id"];
      const auto nb = client.Get("/images/" + id + "/neighbors?x=5&y=6&k=3");
      c.expect(nb && nb->status == 200 && nlohmann::json::parse(nb->body)["neighbors"].size() == 3,
               "service neighbors");
    }
    service.stop();
    server.join();
  }
  return c.outcome("library, CLI and HTTP service exercised end to end; no web UI built or required");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"patch-count", patch_count},         {"kd-exactness", kd_exactness},
      {"speed-ordering", speed_ordering},   {"feature-invariants", feature_invariants},
      {"hand-oracles", hand_oracles},       {"round-trips", round_trips},
      {"cosine-contract", cosine_contract}, {"primary-suite", primary_suite},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-19s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed;
}
