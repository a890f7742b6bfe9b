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

#include <doctest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "patchknn/image.hpp"
#include "test_support.hpp"

using namespace patchknn;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "patchknn");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 225 x 260 texture image and its p = 32 index, built once.
struct Fixture {
  std::filesystem::path dir;
  std::string image;
  std::string index;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture f;
    f.dir = testing::scratch_dir("cli");
    f.image = (f.dir / "tex.png").string();
    f.index = (f.dir / "tex.idx").string();
    write_png(f.image, to_raster(testing::texture_image(225, 260)));
    const Run r = run({"index", f.image, "--patch-size", "32", "--index", f.index});
    REQUIRE(r.code == 0);
    return f;
  }();
  return f;
}

std::string small_image(const std::string& name, const GrayImage& img) {
  const auto path = testing::scratch_dir("cli_" + name) / (name + ".png");
  write_png(path, to_raster(img));
  return path.string();
}

}  // namespace

TEST_CASE("index reports the patch count") {
  const Fixture& f = fixture();
  const Run r = run({"index", f.image, "--patch-size", "32", "-o", (f.dir / "again.idx").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("patches: 44426, features: 9") != std::string::npos);
  CHECK(std::filesystem::file_size(f.index) == 176 + 44426ull * 72);
  CHECK(slurp(f.dir / "again.idx") == slurp(f.index));
}

TEST_CASE("index rejects an oversized patch") {
  const std::string img = small_image("tiny", GrayImage(20, 30, 9));
  const Run r = run({"index", img, "--patch-size", "21", "-o", "/tmp/unused.idx"});
  CHECK(r.code == kExitInvalidPatchSize);
  CHECK(r.err.find("patch") != std::string::npos);
  CHECK(run({"index", img, "--patch-size", "1", "-o", "/tmp/unused.idx"}).code == kExitInvalidPatchSize);
}

TEST_CASE("index and query surface io and decode errors") {
  CHECK(run({"index", "/nonexistent/a.png", "-o", "/tmp/unused.idx"}).code != kExitOk);
  const auto dir = testing::scratch_dir("cli_bad");
  std::ofstream(dir / "junk.png") << "not an image";
  CHECK(run({"index", (dir / "junk.png").string(), "-o", "/tmp/unused.idx"}).code == kExitDecode);
  std::ofstream(dir / "junk.idx") << "nope";
  CHECK(run({"query", "--index", (dir / "junk.idx").string(), "--x", "0", "--y", "0"}).code == kExitFormat);
  CHECK(run({"query", "--x", "0"}).code == kExitUsage);
  CHECK(run({}).code == kExitUsage);
}

TEST_CASE("query by clicked pixel returns the patch itself first") {
  const Fixture& f = fixture();
  const Run r = run({"query", "--index", f.index, "--x", "113", "--y", "104", "--k", "5"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["query_id"] == 25981);
  CHECK(j["x"] == 113);
  CHECK(j["y"] == 104);
  CHECK(j["method"] == "kdtree");
  CHECK(j["metric"] == "euclidean");
  REQUIRE(j["neighbors"].size() == 5);
  CHECK(j["neighbors"][0]["id"] == 25981);
  CHECK(j["neighbors"][0]["distance"] == 0.0);
  double prev = -1;
  for (const auto& n : j["neighbors"]) {
    CHECK(n["distance"].get<double>() >= prev);
    prev = n["distance"].get<double>();
    CHECK(n["id"].get<std::size_t>() == n["x"].get<std::size_t>() * 229 + n["y"].get<std::size_t>());
  }
}

TEST_CASE("brute euclidean and kdtree agree") {
  const Fixture& f = fixture();
  for (const char* xy : {"0", "150", "193"}) {
    const Run kd = run({"query", "--index", f.index, "--x", xy, "--y", "77", "--k", "9"});
    const Run bf =
        run({"query", "--index", f.index, "--x", xy, "--y", "77", "--k", "9", "--method", "brute", "--metric", "euclidean"});
    REQUIRE(kd.code == 0);
    REQUIRE(bf.code == 0);
    CHECK(json::parse(kd.out)["neighbors"] == json::parse(bf.out)["neighbors"]);
  }
  const Run cos = run({"query", "--index", f.index, "--x", "10", "--y", "10", "--method", "brute"});
  REQUIRE(cos.code == 0);
  CHECK(json::parse(cos.out)["metric"] == "cosine");
  CHECK(run({"query", "--index", f.index, "--x", "10", "--y", "10", "--metric", "cosine"}).code == kExitInvalidParams);
}

TEST_CASE("clicks in the margin clamp and clicks outside fail") {
  const Fixture& f = fixture();
  const Run r = run({"query", "--index", f.index, "--x", "224", "--y", "259", "--k", "1"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["query_id"] == 44425);
  const Run bad = run({"query", "--index", f.index, "--x", "225", "--y", "0"});
  CHECK(bad.code == kExitOutOfBounds);
  CHECK(bad.err.find("x in [0, 193], y in [0, 228]") != std::string::npos);
  CHECK(run({"query", "--index", f.index, "--x", "-1", "--y", "0"}).code == kExitOutOfBounds);
}

TEST_CASE("k = 1 draws one rectangle around the query window") {
  const Fixture& f = fixture();
  const auto out_png = f.dir / "one.png";
  const auto out_json = f.dir / "one.json";
  const Run r = run({"query", f.image, "--index", f.index, "--x", "113", "--y", "104", "--k", "1", "--out-image",
                     out_png.string(), "--out-json", out_json.string()});
  REQUIRE(r.code == 0);
  CHECK(json::parse(slurp(out_json)) == json::parse(r.out));
  const Raster original = read_image(f.image);
  const Raster drawn = read_image(out_png);
  REQUIRE(drawn.channels == 3);
  REQUIRE(drawn.height == original.height);
  std::size_t changed = 0;
  for (std::size_t row = 0; row < drawn.height; ++row) {
    for (std::size_t col = 0; col < drawn.width; ++col) {
      const bool edge = row >= 113 && row < 145 && col >= 104 && col < 136 &&
                        (row == 113 || row == 144 || col == 104 || col == 135);
      const std::uint8_t g = original.at(row, col)[0];
      const bool red = drawn.at(row, col)[0] == 255 && drawn.at(row, col)[1] == 0 && drawn.at(row, col)[2] == 0;
      const bool same = drawn.at(row, col)[0] == g && drawn.at(row, col)[1] == g && drawn.at(row, col)[2] == g;
      if (edge) {
        CHECK(red);
      } else {
        CHECK(same);
      }
      changed += red ? 1 : 0;
    }
  }
  CHECK(changed == 124);
}

TEST_CASE("query without an index builds one on the fly") {
  const std::string img = small_image("fly", testing::texture_image(50, 60, 11));
  const Run r = run({"query", img, "--patch-size", "8", "--x", "3", "--y", "4", "--k", "3"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["query_id"] == 3 * 53 + 4);
  CHECK(run({"query", "--x", "0", "--y", "0"}).code == kExitInvalidParams);
}

TEST_CASE("bench output is consistent") {
  const Fixture& f = fixture();
  const auto out_json = f.dir / "bench.json";
  const Run r = run({"bench", "--index", f.index, "--x", "113", "--y", "104", "--k", "5", "--repeat", "5",
                     "--out-json", out_json.string()});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j == json::parse(slurp(out_json)));
  CHECK(j["query_id"] == 25981);
  CHECK(j["euclidean_agreement"] == true);
  const auto& m = j["methods"];
  REQUIRE(m.size() == 2);
  CHECK(m[0]["method"] == "brute");
  CHECK(m[0]["metric"] == "cosine");
  CHECK(m[1]["method"] == "kdtree");
  const double speedup = m[0]["elapsed_s"].get<double>() / m[1]["elapsed_s"].get<double>();
  CHECK(std::abs(speedup - j["speedup"].get<double>()) <= 1e-9 * speedup);
  for (const auto& method : m) {
    CHECK(method["curve"].size() == 5);
    CHECK(method["neighbors"].size() == 5);
    CHECK(method["speed"].get<double>() ==
          doctest::Approx(method["d_max"].get<double>() / method["elapsed_s"].get<double>()).epsilon(1e-12));
  }
  CHECK(run({"bench", "--index", f.index, "--id", "44426"}).code == kExitOutOfBounds);
  CHECK(run({"bench", "--index", f.index, "--id", "0", "--repeat", "0"}).code == kExitUsage);
}

TEST_CASE("features of a constant patch") {
  const std::string img = small_image("flat", GrayImage(40, 40, 128));
  const Run r = run({"features", img, "--x", "3", "--y", "5", "--patch-size", "16"});
  REQUIRE(r.code == 0);
  const char* expected[] = {"lbp_energy: 1\n",       "lbp_entropy: 0\n",       "glcm_contrast: 0\n",
                            "glcm_dissimilarity: 0\n", "glcm_homogeneity: 1\n", "glcm_energy: 1\n",
                            "glcm_correlation: 1\n", "gabor_energy: 1\n",      "gabor_entropy: 0\n"};
  for (const char* line : expected) CHECK(r.out.find(line) != std::string::npos);
}

TEST_CASE("features of a checkerboard patch") {
  GrayImage board(4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) board.at(r, c) = (r + c) % 2 == 0 ? 0 : 1;
  }
  const std::string img = small_image("board", board);
  const auto out_json = testing::scratch_dir("cli_board_json") / "f.json";
  const Run r = run({"features", img, "--x", "0", "--y", "0", "--patch-size", "4", "--out-json", out_json.string()});
  REQUIRE(r.code == 0);
  const json j = json::parse(slurp(out_json));
  const auto& v = j["features"];
  CHECK(std::abs(v["glcm_contrast"].get<double>() - 1) <= 1e-12);
  CHECK(std::abs(v["glcm_dissimilarity"].get<double>() - 1) <= 1e-12);
  CHECK(std::abs(v["glcm_homogeneity"].get<double>() - 0.5) <= 1e-12);
  CHECK(std::abs(v["glcm_energy"].get<double>() - std::sqrt(0.5)) <= 1e-12);
  CHECK(std::abs(v["glcm_correlation"].get<double>() + 1) <= 1e-12);
}

TEST_CASE("features flags and errors") {
  const std::string img = small_image("flags", testing::texture_image(40, 40, 2));
  const Run bad = run({"features", img, "--x", "40", "--y", "0", "--patch-size", "8"});
  CHECK(bad.code == kExitOutOfBounds);
  CHECK(bad.err.find("[0, 32]") != std::string::npos);
  CHECK(run({"features", img, "--x", "0", "--y", "0", "--lbp-radius", "0"}).code == kExitInvalidParams);
  CHECK(run({"features", img, "--x", "0", "--y", "0", "--patch-size", "4", "--lbp-radius", "2"}).code ==
        kExitInvalidParams);
  CHECK(run({"features", img, "--x", "0", "--y", "0", "--patch-size", "8", "--glcm-offset", "1,1"}).code == 0);

  const auto conf = testing::scratch_dir("cli_conf") / "f.conf";
  std::ofstream(conf) << "gabor-sigma = 2\n";
  const Run a = run({"features", img, "--x", "0", "--y", "0", "--patch-size", "8", "--config", conf.string()});
  const Run b = run({"features", img, "--x", "0", "--y", "0", "--patch-size", "8", "--gabor-sigma", "2"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  std::ofstream(conf) << "bogus = 2\n";
  CHECK(run({"features", img, "--x", "0", "--y", "0", "--config", conf.string()}).code == kExitInvalidParams);
}
