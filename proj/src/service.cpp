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

#include "patchknn/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <condition_variable>
#include <deque>
#include <list>
#include <mutex>
#include <optional>
#include <random>
#include <stop_token>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "patchknn/error.hpp"
#include "patchknn/feature_matrix.hpp"
#include "patchknn/image.hpp"
#include "patchknn/params.hpp"
#include "patchknn/patch_grid.hpp"
#include "patchknn/query.hpp"

namespace patchknn {

namespace {

using nlohmann::json;

enum class BuildStatus { pending, ready, failed };

std::string_view to_string(BuildStatus s) {
  switch (s) {
    case BuildStatus::pending: return "pending";
    case BuildStatus::ready: return "ready";
    case BuildStatus::failed: return "failed";
  }
  return "failed";
}

struct BuiltIndex {
  PatchGrid grid;
  SearchIndex index;
};

struct Session {
  std::string id;
  Raster original;
  GridShape grid;
  FeatureParams params;

  mutable std::mutex mu;
  BuildStatus status = BuildStatus::pending;
  std::string failure;
  std::shared_ptr<const BuiltIndex> built;

  struct Snapshot {
    BuildStatus status;
    std::string failure;
    std::shared_ptr<const BuiltIndex> built;
  };
  Snapshot snapshot() const {
    std::lock_guard lock(mu);
    return {status, failure, built};
  }
  void finish(std::shared_ptr<const BuiltIndex> result) {
    std::lock_guard lock(mu);
    if (status != BuildStatus::pending) return;
    built = std::move(result);
    status = BuildStatus::ready;
  }
  void fail(std::string reason) {
    std::lock_guard lock(mu);
    if (status != BuildStatus::pending) return;
    failure = std::move(reason);
    status = BuildStatus::failed;
  }
};

void build_session(Session& s, const KdTreeOptions& kd) {
  try {
    PatchGrid grid(to_grayscale(s.original), s.grid.patch_size);
    FeatureMatrix matrix = normalize_minmax(build_feature_matrix(grid, s.params));
    SearchIndex index(std::move(matrix), grid.shape(), kd);
    s.finish(std::make_shared<const BuiltIndex>(BuiltIndex{std::move(grid), std::move(index)}));
    spdlog::info("session {}: index ready ({} patches)", s.id, s.grid.patch_count());
  } catch (const std::exception& e) {
    spdlog::warn("session {}: build failed: {}", s.id, e.what());
    s.fail(e.what());
  }
}

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, std::string code, const std::string& detail)
      : std::runtime_error(detail), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view detail) {
  send_json(res, status, {{"error", code}, {"detail", detail}});
}

std::string_view status_code_name(int status) {
  switch (status) {
    case 400: return "bad-request";
    case 404: return "not-found";
    case 409: return "not-ready";
    case 413: return "payload-too-large";
    case 422: return "invalid-params";
    default: return status >= 500 ? "internal-error" : "error";
  }
}

std::int64_t int_param(const httplib::Request& req, const std::string& name, std::optional<std::int64_t> fallback) {
  if (!req.has_param(name)) {
    if (fallback) return *fallback;
    throw HttpError(422, "invalid-params", "missing query parameter '" + name + "'");
  }
  const std::string v = req.get_param_value(name);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw HttpError(422, "invalid-params", "query parameter '" + name + "' must be an integer, got '" + v + "'");
  }
  return out;
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions opts) : options(std::move(opts)) {
    options.feature_defaults.validate();
    builder = std::jthread([this](std::stop_token st) { build_loop(st); });
    routes();
  }

  ~Impl() {
    server.stop();
    builder.request_stop();
    queue_cv.notify_all();
  }

  ServiceOptions options;
  httplib::Server server;

  std::mutex registry_mu;
  std::list<std::string> lru;  // front = most recently used
  std::unordered_map<std::string, std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>> sessions;
  std::mt19937_64 rng{std::random_device{}()};

  std::mutex queue_mu;
  std::condition_variable_any queue_cv;
  std::deque<std::shared_ptr<Session>> queue;
  std::jthread builder;

  void build_loop(std::stop_token st) {
    for (;;) {
      std::shared_ptr<Session> next;
      {
        std::unique_lock lock(queue_mu);
        if (!queue_cv.wait(lock, st, [&] { return !queue.empty(); })) return;
        next = std::move(queue.front());
        queue.pop_front();
      }
      build_session(*next, options.kd_options);
    }
  }

  std::string new_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id(16, '0');
    std::uint64_t bits = rng();
    for (char& c : id) {
      c = kHex[bits & 0xf];
      bits >>= 4;
    }
    return id;
  }

  void insert(const std::shared_ptr<Session>& s) {
    std::lock_guard lock(registry_mu);
    do {
      s->id = new_id();
    } while (sessions.contains(s->id));
    lru.push_front(s->id);
    sessions.emplace(s->id, std::make_pair(s, lru.begin()));
    while (sessions.size() > options.max_sessions) {
      spdlog::info("evicting session {}", lru.back());
      sessions.erase(lru.back());
      lru.pop_back();
    }
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(registry_mu);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError(404, "not-found", "unknown image id '" + id + "'");
    lru.splice(lru.begin(), lru, it->second.second);
    return it->second.first;
  }

  std::shared_ptr<const BuiltIndex> ready(const Session& s) {
    auto snap = s.snapshot();
    if (snap.status == BuildStatus::pending) throw HttpError(409, "not-ready", "index build still pending");
    if (snap.status == BuildStatus::failed) throw HttpError(409, "build-failed", snap.failure);
    return snap.built;
  }

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        send_error(res, e.status(), e.code(), e.what());
      } catch (const Error& e) {
        const int status = e.code() == Errc::decode ? 400 : 422;
        send_error(res, status, to_string(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal-error", e.what());
      }
    };
  }

  void upload(const httplib::Request& req, httplib::Response& res) {
    std::string_view body = req.body;
    if (req.is_multipart_form_data()) {
      if (req.files.empty()) throw HttpError(400, "decode", "multipart upload without a file part");
      body = req.files.begin()->second.content;
    }
    if (body.size() > options.max_upload_bytes) {
      throw HttpError(413, "payload-too-large",
                      "upload of " + std::to_string(body.size()) + " bytes exceeds the limit of " +
                          std::to_string(options.max_upload_bytes));
    }
    if (body.empty()) throw HttpError(400, "decode", "empty request body");

    auto session = std::make_shared<Session>();
    session->params = options.feature_defaults;
    for (const auto& [key, value] : req.params) {
      if (is_feature_setting(key)) apply_setting(session->params, key, value);
    }
    session->original = decode_image(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(body.data()), body.size()));
    const auto patch_size = int_param(req, "patch_size", 32);
    if (patch_size < 0) throw HttpError(422, "invalid-patch-size", "patch_size must be positive");
    session->grid = GridShape::make(session->original.height, session->original.width,
                                    static_cast<std::size_t>(patch_size));
    session->params.validate_for_patch(session->grid.patch_size);

    insert(session);
    spdlog::info("session {}: {}x{} image, patch size {}, {} patches", session->id, session->grid.image_height,
                 session->grid.image_width, patch_size, session->grid.patch_count());
    if (session->grid.patch_count() <= options.inline_build_max_patches) {
      build_session(*session, options.kd_options);
    } else {
      std::lock_guard lock(queue_mu);
      queue.push_back(session);
      queue_cv.notify_one();
    }
    send_json(res, 202, {{"image_id", session->id}, {"status", to_string(session->snapshot().status)}});
  }

  void meta(const httplib::Request& req, httplib::Response& res) {
    const auto session = find(req.matches[1]);
    const auto snap = session->snapshot();
    const GridShape& g = session->grid;
    json body = {
        {"image_id", session->id},
        {"M", g.image_height},
        {"N", g.image_width},
        {"patch_size", g.patch_size},
        {"grid_h", g.grid_height()},
        {"grid_w", g.grid_width()},
        {"n_patches", g.patch_count()},
        {"n_features", kFeatureCount},
        {"status", to_string(snap.status)},
        {"features", to_json(session->params)},
    };
    if (snap.status == BuildStatus::failed) body["error"] = snap.failure;
    send_json(res, 200, body);
  }

  void neighbors(const httplib::Request& req, httplib::Response& res) {
    const auto session = find(req.matches[1]);
    const auto built = ready(*session);
    const std::int64_t x = int_param(req, "x", std::nullopt);
    const std::int64_t y = int_param(req, "y", std::nullopt);
    const std::int64_t k = int_param(req, "k", 5);
    if (k < 1) throw HttpError(422, "invalid-params", "k must be >= 1");
    SearchIndex::Request request;
    request.k = static_cast<std::size_t>(k);
    request.method = parse_method(req.has_param("method") ? req.get_param_value("method") : "kdtree");
    if (req.has_param("metric")) request.metric = parse_metric(req.get_param_value("metric"));
    if (req.has_param("exclude_self")) {
      const auto v = req.get_param_value("exclude_self");
      request.exclude_self = v == "1" || v == "true";
    }
    const GridShape& grid = built->index.grid();
    const PatchCoords top_left = clamp_to_grid(x, y, grid);
    request.query_id = patch_id(x, y, grid);
    json body = to_json(built->index.query(request));
    body["image_id"] = session->id;
    body["requested"] = {{"x", x}, {"y", y}};
    body["clamped"] = static_cast<std::int64_t>(top_left.x) != x || static_cast<std::int64_t>(top_left.y) != y;
    send_json(res, 200, body);
  }

  void patch_png(const httplib::Request& req, httplib::Response& res) {
    const auto session = find(req.matches[1]);
    const auto built = ready(*session);
    const std::string t_text = req.matches[2];
    std::size_t t = 0;
    const auto [ptr, ec] = std::from_chars(t_text.data(), t_text.data() + t_text.size(), t);
    if (ec != std::errc{} || ptr != t_text.data() + t_text.size()) {
      throw HttpError(422, "invalid-params", "patch id must be a non-negative integer");
    }
    if (t >= built->grid.size()) {
      throw HttpError(422, "out-of-bounds", "patch id " + t_text + " out of range [0, " +
                                                std::to_string(built->grid.size()) + ")");
    }
    const auto png = encode_png(to_raster(built->grid.patch(t).copy()));
    res.status = 200;
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }

  void image_png(const httplib::Request& req, httplib::Response& res) {
    const auto session = find(req.matches[1]);
    const auto png = encode_png(session->original);
    res.status = 200;
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }

  void routes() {
    server.set_payload_max_length(options.max_upload_bytes + (1u << 16));
    server.Post("/images", guarded([this](const auto& req, auto& res) { upload(req, res); }));
    server.Get(R"(/images/([0-9a-f]+)/meta)", guarded([this](const auto& req, auto& res) { meta(req, res); }));
    server.Get(R"(/images/([0-9a-f]+)/neighbors)",
               guarded([this](const auto& req, auto& res) { neighbors(req, res); }));
    server.Get(R"(/images/([0-9a-f]+)/patch/([^/]+)\.png)",
               guarded([this](const auto& req, auto& res) { patch_png(req, res); }));
    server.Get(R"(/images/([0-9a-f]+)/image\.png)",
               guarded([this](const auto& req, auto& res) { image_png(req, res); }));
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    // Fills a JSON body for statuses httplib produces itself (404 on unknown
    // routes, 413 from the payload limit).
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      const std::string detail = res.status == 404 ? "no route for " + req.method + " " + req.path
                                                   : std::string(httplib::status_message(res.status));
      send_error(res, res.status, status_code_name(res.status), detail);
    });
    server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      if (options.cors_origin.empty()) return;
      res.set_header("Access-Control-Allow-Origin", options.cors_origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::run() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace patchknn
