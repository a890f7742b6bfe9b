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

#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>

#include <nlohmann/json.hpp>

#include "patchknn/bench_report.hpp"
#include "patchknn/error.hpp"
#include "patchknn/feature_matrix.hpp"
#include "patchknn/image.hpp"
#include "patchknn/index_store.hpp"
#include "patchknn/params.hpp"
#include "patchknn/query.hpp"
#include "patchknn/service.hpp"

namespace patchknn {

namespace {

using nlohmann::json;

void init_logging() {
  if (spdlog::get("patchknn") == nullptr) {
    auto logger = spdlog::stderr_color_mt("patchknn");
    spdlog::set_default_logger(logger);
  }
  const char* level = std::getenv("PATCHKNN_LOG_LEVEL");
  spdlog::set_level(level != nullptr ? spdlog::level::from_str(level) : spdlog::level::warn);
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::io: return kExitIo;
    case Errc::decode: return kExitDecode;
    case Errc::invalid_patch_size: return kExitInvalidPatchSize;
    case Errc::out_of_bounds: return kExitOutOfBounds;
    case Errc::invalid_params:
    case Errc::not_normalized: return kExitInvalidParams;
    case Errc::format: return kExitFormat;
  }
  return kExitInternal;
}

/// Feature-parameter flags shared by every subcommand that extracts features.
struct FeatureFlags {
  std::string config;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config, "key = value file with feature parameters")->check(CLI::ExistingFile);
    for (const char* key : {"lbp-points", "lbp-radius", "glcm-offset", "glcm-levels", "gabor-lambda", "gabor-theta",
                            "gabor-sigma", "gabor-gamma", "gabor-psi"}) {
      cmd.add_option_function<std::string>(
          std::string("--") + key, [this, key](const std::string& v) { overrides[key] = v; },
          std::string("feature override: ") + key);
    }
  }

  FeatureParams resolve() const {
    FeatureParams params;
    if (!config.empty()) {
      for (const auto& [key, value] : read_config(config)) apply_setting(params, key, value);
    }
    for (const auto& [key, value] : overrides) apply_setting(params, key, value);
    params.validate();
    return params;
  }
};

struct Built {
  std::optional<Raster> original;
  GridShape grid;
  FeatureMatrix matrix;
};

Built build_from_image(const std::string& image_path, std::size_t patch_size, const FeatureParams& params) {
  Built b;
  b.original = read_image(image_path);
  PatchGrid grid(to_grayscale(*b.original), patch_size);
  b.grid = grid.shape();
  b.matrix = normalize_minmax(build_feature_matrix(grid, params));
  return b;
}

/// Loads --index when given (checking it against the image, if any), else
/// indexes the image.
Built load_or_build(const std::string& image_path, const std::string& index_path, std::size_t patch_size,
                    bool patch_size_given, const FeatureParams& params) {
  if (index_path.empty()) {
    if (image_path.empty()) throw Error(Errc::invalid_params, "either an image or --index is required");
    return build_from_image(image_path, patch_size, params);
  }
  StoredIndex stored = load_index(index_path);
  if (patch_size_given && stored.grid.patch_size != patch_size) {
    throw Error(Errc::invalid_params, "--patch-size " + std::to_string(patch_size) +
                                          " does not match the index patch size " +
                                          std::to_string(stored.grid.patch_size));
  }
  Built b{std::nullopt, stored.grid, std::move(stored.matrix)};
  if (!image_path.empty()) {
    b.original = read_image(image_path);
    if (b.original->height != b.grid.image_height || b.original->width != b.grid.image_width) {
      throw Error(Errc::invalid_params, "image is " + std::to_string(b.original->height) + "x" +
                                            std::to_string(b.original->width) + " but the index was built for " +
                                            std::to_string(b.grid.image_height) + "x" +
                                            std::to_string(b.grid.image_width));
    }
  }
  return b;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot write " + path);
  f << text << '\n';
  if (!f) throw Error(Errc::io, "short write to " + path);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  init_logging();
  CLI::App app{"Texture-feature nearest-neighbor search over image patches", "patchknn"};
  app.require_subcommand(1);

  std::string image_path;
  std::string index_path;
  std::size_t patch_size = 32;
  std::size_t k = 5;
  std::string method = "kdtree";
  std::string metric;
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::optional<std::size_t> query_id;
  std::size_t repeats = 1;
  bool exclude_self = false;
  std::string out_image;
  std::string out_json;
  FeatureFlags features;

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::size_t max_sessions = 8;
  std::size_t max_upload_mb = 16;

  auto* index_cmd = app.add_subcommand("index", "extract features for every patch and save the index");
  index_cmd->add_option("image", image_path, "PNG or P5 PGM image")->required();
  index_cmd->add_option("--patch-size", patch_size, "patch side in pixels")->capture_default_str();
  index_cmd->add_option("--index,-o", index_path, "output index file")->required();
  features.attach(*index_cmd);

  auto* query_cmd = app.add_subcommand("query", "k nearest patches to the patch at (x, y)");
  query_cmd->add_option("image", image_path, "image (indexed on the fly without --index)");
  auto* query_patch_opt = query_cmd->add_option("--patch-size", patch_size, "patch side in pixels");
  query_cmd->add_option("--index", index_path, "prebuilt index file");
  query_cmd->add_option("--x", x, "row of the clicked pixel")->required();
  query_cmd->add_option("--y", y, "column of the clicked pixel")->required();
  query_cmd->add_option("--k", k, "number of neighbors")->capture_default_str()->check(CLI::PositiveNumber);
  query_cmd->add_option("--method", method, "brute or kdtree")
      ->capture_default_str()
      ->check(CLI::IsMember({"brute", "kdtree"}));
  query_cmd->add_option("--metric", metric, "cosine or euclidean (default: cosine for brute, euclidean for kdtree)")
      ->check(CLI::IsMember({"cosine", "euclidean"}));
  query_cmd->add_flag("--exclude-self", exclude_self, "drop the query patch from its own result");
  query_cmd->add_option("--out-image", out_image, "annotated PNG with one rectangle per neighbor");
  query_cmd->add_option("--out-json", out_json, "also write the result JSON here");
  features.attach(*query_cmd);

  auto* bench_cmd = app.add_subcommand("bench", "time brute force against the kd-tree on one query");
  bench_cmd->add_option("image", image_path, "image (indexed on the fly without --index)");
  auto* bench_patch_opt = bench_cmd->add_option("--patch-size", patch_size, "patch side in pixels");
  bench_cmd->add_option("--index", index_path, "prebuilt index file");
  bench_cmd->add_option("--id", query_id, "query patch id");
  auto* bench_x = bench_cmd->add_option("--x", x, "row of the query pixel");
  auto* bench_y = bench_cmd->add_option("--y", y, "column of the query pixel");
  bench_x->needs(bench_y);
  bench_y->needs(bench_x);
  bench_cmd->add_option("--k", k, "number of neighbors")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--repeat", repeats, "timed runs per method (median reported)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out-json", out_json, "also write the report JSON here");
  features.attach(*bench_cmd);

  auto* features_cmd = app.add_subcommand("features", "print the raw feature vector of one patch");
  features_cmd->add_option("image", image_path, "PNG or P5 PGM image")->required();
  features_cmd->add_option("--patch-size", patch_size, "patch side in pixels")->capture_default_str();
  features_cmd->add_option("--x", x, "row of the patch top-left")->required();
  features_cmd->add_option("--y", y, "column of the patch top-left")->required();
  features_cmd->add_option("--out-json", out_json, "also write the values as JSON here");
  features.attach(*features_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP query service");
  serve_cmd->add_option("--host", host, "bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "bind port (0 picks a free one)")->capture_default_str();
  serve_cmd->add_option("--cors-origin", cors_origin, "Access-Control-Allow-Origin value, empty to disable")
      ->capture_default_str();
  serve_cmd->add_option("--max-sessions", max_sessions, "images kept in memory")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  serve_cmd->add_option("--max-upload-mb", max_upload_mb, "upload size limit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  features.attach(*serve_cmd);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (index_cmd->parsed()) {
      const auto start = std::chrono::steady_clock::now();
      const Built b = build_from_image(image_path, patch_size, features.resolve());
      save_index(index_path, b.matrix, b.grid);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      out << "patches: " << b.matrix.rows() << ", features: " << b.matrix.cols() << '\n';
      out << "elapsed: " << std::fixed << std::setprecision(3) << elapsed.count() << " s\n";
      return kExitOk;
    }

    if (query_cmd->parsed()) {
      const Built b = load_or_build(image_path, index_path, patch_size, query_patch_opt->count() > 0,
                                    features.resolve());
      if (!out_image.empty() && !b.original) {
        throw Error(Errc::invalid_params, "--out-image needs the source image");
      }
      const SearchIndex index(b.matrix, b.grid);
      SearchIndex::Request request;
      request.query_id = patch_id(x, y, b.grid);
      request.k = k;
      request.method = parse_method(method);
      if (!metric.empty()) request.metric = parse_metric(metric);
      request.exclude_self = exclude_self;
      const QueryResult result = index.query(request);

      const json body = to_json(result);
      out << body.dump(2) << '\n';
      if (!out_json.empty()) write_text(out_json, body.dump(2));
      if (!out_image.empty()) {
        std::vector<Rect> rects;
        for (const RankedPatch& n : result.neighbors) rects.push_back({n.x, n.y, b.grid.patch_size});
        write_png(out_image, annotate(*b.original, rects));
      }
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      const Built b = load_or_build(image_path, index_path, patch_size, bench_patch_opt->count() > 0,
                                    features.resolve());
      const SearchIndex index(b.matrix, b.grid);
      std::size_t t = query_id.value_or(0);
      if (bench_x->count() > 0) t = patch_id(x, y, b.grid);
      (void)patch_coords(t, b.grid);
      const json body = to_json(run_benchmark(index, t, k, repeats));
      out << body.dump(2) << '\n';
      if (!out_json.empty()) write_text(out_json, body.dump(2));
      return kExitOk;
    }

    if (features_cmd->parsed()) {
      const FeatureParams params = features.resolve();
      PatchGrid grid(to_grayscale(read_image(image_path)), patch_size);
      params.validate_for_patch(patch_size);
      const std::size_t t = patch_id(x, y, grid.shape());
      const PatchView patch = grid.patch(t);
      const FeatureVector v = feature_vector(patch, params);
      json values = json::object();
      out << "patch " << t << " at (" << patch.x() << ", " << patch.y() << "), size " << patch_size << '\n';
      out << std::setprecision(12);
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        out << kFeatureNames[i] << ": " << v[i] << '\n';
        values[std::string(kFeatureNames[i])] = v[i];
      }
      if (!out_json.empty()) {
        write_text(out_json, json{{"patch_id", t}, {"x", patch.x()}, {"y", patch.y()}, {"features", values}}.dump(2));
      }
      return kExitOk;
    }

    if (serve_cmd->parsed()) {
      ServiceOptions options;
      options.cors_origin = cors_origin;
      options.max_sessions = max_sessions;
      options.max_upload_bytes = max_upload_mb << 20;
      options.feature_defaults = features.resolve();
      Service service(options);
      const int bound = service.bind(host, port);
      if (bound < 0) throw Error(Errc::io, "cannot bind " + host + ":" + std::to_string(port));
      out << "listening on http://" << host << ':' << bound << std::endl;
      return service.run() ? kExitOk : kExitIo;
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace patchknn
