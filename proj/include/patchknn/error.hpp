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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace patchknn {

enum class Errc : std::uint8_t {
  decode = 1,
  invalid_patch_size,
  out_of_bounds,
  invalid_params,
  not_normalized,
  format,
  io,
};

std::string_view to_string(Errc code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Sub-kinds of an index-file format error. The kind name is part of the
/// message so callers (and users) can tell them apart.
enum class FormatErrc : std::uint8_t {
  magic,
  version,
  truncated,
  dimension,
  value,
};

std::string_view to_string(FormatErrc kind) noexcept;

class FormatError : public Error {
 public:
  FormatError(FormatErrc kind, const std::string& detail);
  FormatErrc kind() const noexcept { return kind_; }

 private:
  FormatErrc kind_;
};

}  // namespace patchknn
