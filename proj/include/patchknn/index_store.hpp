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
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "patchknn/feature_matrix.hpp"
#include "patchknn/patch_grid.hpp"

namespace patchknn {

// On-disk index layout, all integers and floats little-endian:
//
//   offset  size       field
//   0       4          magic "SIMP"
//   4       4          u32 format version (1)
//   8       4          u32 image height M
//   12      4          u32 image width N
//   16      4          u32 patch size p
//   20      8          u64 patch count N_p = (M - p + 1)(N - p + 1)
//   28      4          u32 feature count N_f
//   32      8 N_f      f64 per-column raw minimum
//   ..      8 N_f      f64 per-column raw maximum
//   ..      8 N_p N_f  f64 normalized matrix, row-major, values in [0, 1]

inline constexpr std::uint32_t kIndexVersion = 1;
inline constexpr std::size_t kIndexFixedHeader = 32;

inline constexpr std::size_t index_header_size(std::size_t feature_count) {
  return kIndexFixedHeader + 16 * feature_count;
}

struct StoredIndex {
  FeatureMatrix matrix;
  GridShape grid;
};

/// Throws Error(Errc::not_normalized) for raw matrices and
/// Error(Errc::invalid_params) when the matrix does not match the grid.
std::vector<std::uint8_t> encode_index(const FeatureMatrix& matrix, const GridShape& grid);

/// Throws FormatError naming the failed check.
StoredIndex decode_index(std::span<const std::uint8_t> bytes);

/// Writes to a sibling temp file and renames it into place.
void save_index(const std::filesystem::path& path, const FeatureMatrix& matrix, const GridShape& grid);
StoredIndex load_index(const std::filesystem::path& path);

}  // namespace patchknn
