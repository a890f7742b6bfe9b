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
#include <memory>
#include <string>

#include "patchknn/features.hpp"
#include "patchknn/kd_tree.hpp"

namespace patchknn {

struct ServiceOptions {
  std::size_t max_sessions = 8;
  std::size_t max_upload_bytes = 16u << 20;
  /// Value of Access-Control-Allow-Origin; empty disables CORS headers.
  std::string cors_origin = "*";
  FeatureParams feature_defaults;
  KdTreeOptions kd_options;
  /// Uploads with at most this many patches are indexed before the POST
  /// returns; larger ones are queued for the builder thread.
  std::size_t inline_build_max_patches = 4096;
};

/// HTTP front end:
///
///   POST /images?patch_size=&<feature overrides>   body: PNG or P5 PGM bytes
///   GET  /images/{id}/meta
///   GET  /images/{id}/neighbors?x=&y=&k=&method=[&metric=&exclude_self=]
///   GET  /images/{id}/patch/{t}.png
///   GET  /images/{id}/image.png
///   GET  /health
///
/// Errors carry a JSON body {"error": ..., "detail": ...}.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Port 0 picks a free port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call bind() first.
  bool run();
  void stop();
  /// Blocks until the listener accepts connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace patchknn
