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

#include "patchknn/error.hpp"

namespace patchknn {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::decode: return "decode";
    case Errc::invalid_patch_size: return "invalid-patch-size";
    case Errc::out_of_bounds: return "out-of-bounds";
    case Errc::invalid_params: return "invalid-params";
    case Errc::not_normalized: return "not-normalized";
    case Errc::format: return "format";
    case Errc::io: return "io";
  }
  return "unknown";
}

std::string_view to_string(FormatErrc kind) noexcept {
  switch (kind) {
    case FormatErrc::magic: return "magic";
    case FormatErrc::version: return "version";
    case FormatErrc::truncated: return "truncated";
    case FormatErrc::dimension: return "dimension";
    case FormatErrc::value: return "value";
  }
  return "unknown";
}

FormatError::FormatError(FormatErrc kind, const std::string& detail)
    : Error(Errc::format, "index format error (" + std::string(to_string(kind)) + "): " + detail),
      kind_(kind) {}

}  // namespace patchknn
