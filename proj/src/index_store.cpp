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

#include "patchknn/index_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <system_error>

#include "patchknn/error.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <unistd.h>
#endif

namespace patchknn {

namespace {

constexpr char kMagic[4] = {'S', 'I', 'M', 'P'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<T>(bytes[offset + i]) << (8 * i));
  }
  return v;
}

double get_f64(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
}

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

struct Header {
  std::uint32_t height;
  std::uint32_t width;
  std::uint32_t patch;
  std::uint64_t count;
  std::uint32_t features;
  std::size_t total_size;
};

Header parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kIndexFixedHeader) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0) {
      throw FormatError(FormatErrc::magic, "bad magic, expected \"SIMP\"");
    }
    throw FormatError(FormatErrc::truncated, "header: expected at least " + std::to_string(kIndexFixedHeader) +
                                                 " bytes, got " + std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(FormatErrc::magic, "bad magic, expected \"SIMP\"");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kIndexVersion) {
    throw FormatError(FormatErrc::version, "unsupported version " + std::to_string(version) + ", expected " +
                                               std::to_string(kIndexVersion));
  }
  Header h{get_le<std::uint32_t>(bytes, 8), get_le<std::uint32_t>(bytes, 12), get_le<std::uint32_t>(bytes, 16),
           get_le<std::uint64_t>(bytes, 20), get_le<std::uint32_t>(bytes, 28), 0};
  try {
    const GridShape grid = GridShape::make(h.height, h.width, h.patch);
    if (grid.patch_count() != h.count) {
      throw FormatError(FormatErrc::dimension, "patch count " + std::to_string(h.count) + " does not match " +
                                                   std::to_string(grid.patch_count()) + " for a " +
                                                   std::to_string(h.height) + "x" + std::to_string(h.width) +
                                                   " image with patch size " + std::to_string(h.patch));
    }
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(FormatErrc::dimension, e.what());
  }
  if (h.features == 0 || h.features > 4096) {
    throw FormatError(FormatErrc::dimension, "feature count " + std::to_string(h.features) + " out of range");
  }
  const std::uint64_t limit = std::numeric_limits<std::size_t>::max() / 16;
  if (h.count > limit / h.features) {
    throw FormatError(FormatErrc::dimension, "declared payload too large");
  }
  h.total_size = index_header_size(h.features) + static_cast<std::size_t>(h.count) * h.features * 8;
  return h;
}

}  // namespace

std::vector<std::uint8_t> encode_index(const FeatureMatrix& matrix, const GridShape& grid) {
  if (!matrix.normalized()) {
    throw Error(Errc::not_normalized, "only normalized feature matrices can be saved");
  }
  if (matrix.rows() != grid.patch_count()) {
    throw Error(Errc::invalid_params, "matrix rows do not match the grid patch count");
  }
  if (grid.image_height > std::numeric_limits<std::uint32_t>::max() ||
      grid.image_width > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::invalid_params, "image too large for the index format");
  }
  for (double v : matrix.values()) {
    if (!in_unit_interval(v)) throw Error(Errc::not_normalized, "normalized matrix has a value outside [0, 1]");
  }
  std::vector<std::uint8_t> out;
  out.reserve(index_header_size(matrix.cols()) + matrix.values().size() * 8);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kIndexVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.image_height));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.image_width));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.patch_size));
  put_le<std::uint64_t>(out, grid.patch_count());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.cols()));
  for (double v : matrix.column_min()) put_f64(out, v);
  for (double v : matrix.column_max()) put_f64(out, v);
  for (double v : matrix.values()) put_f64(out, v);
  return out;
}

StoredIndex decode_index(std::span<const std::uint8_t> bytes) {
  const Header h = parse_header(bytes);
  if (bytes.size() < h.total_size) {
    throw FormatError(FormatErrc::truncated, "expected " + std::to_string(h.total_size) + " bytes, got " +
                                                 std::to_string(bytes.size()));
  }
  if (bytes.size() > h.total_size) {
    throw FormatError(FormatErrc::dimension, "header declares " + std::to_string(h.total_size) +
                                                 " bytes but the file holds " + std::to_string(bytes.size()));
  }
  const std::size_t cols = h.features;
  std::vector<double> col_min(cols);
  std::vector<double> col_max(cols);
  std::size_t off = kIndexFixedHeader;
  for (std::size_t c = 0; c < cols; ++c, off += 8) col_min[c] = get_f64(bytes, off);
  for (std::size_t c = 0; c < cols; ++c, off += 8) col_max[c] = get_f64(bytes, off);
  for (std::size_t c = 0; c < cols; ++c) {
    if (!std::isfinite(col_min[c]) || !std::isfinite(col_max[c]) || col_min[c] > col_max[c]) {
      throw FormatError(FormatErrc::value, "column " + std::to_string(c) + " has an invalid range");
    }
  }
  const std::size_t rows = static_cast<std::size_t>(h.count);
  std::vector<double> values(rows * cols);
  for (std::size_t i = 0; i < values.size(); ++i, off += 8) {
    values[i] = get_f64(bytes, off);
    if (!in_unit_interval(values[i])) {
      throw FormatError(FormatErrc::value, "payload value " + std::to_string(i) + " outside [0, 1]");
    }
  }
  StoredIndex out{FeatureMatrix(rows, cols, std::move(values)), GridShape::make(h.height, h.width, h.patch)};
  out.matrix.set_normalization(std::move(col_min), std::move(col_max));
  return out;
}

void save_index(const std::filesystem::path& path, const FeatureMatrix& matrix, const GridShape& grid) {
  const auto bytes = encode_index(matrix, grid);
  auto tmp = path;
#if defined(__unix__) || defined(__APPLE__)
  tmp += ".tmp." + std::to_string(::getpid());
#else
  tmp += ".tmp";
#endif
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(Errc::io, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(Errc::io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

StoredIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::error_code ec;
  const auto file_size = static_cast<std::size_t>(std::filesystem::file_size(path, ec));
  if (ec) throw Error(Errc::io, "cannot stat " + path.string() + ": " + ec.message());

  std::vector<std::uint8_t> bytes(std::min(file_size, kIndexFixedHeader));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  const Header h = parse_header(bytes);
  if (file_size < h.total_size) {
    throw FormatError(FormatErrc::truncated,
                      "expected " + std::to_string(h.total_size) + " bytes, got " + std::to_string(file_size));
  }
  if (file_size > h.total_size) {
    throw FormatError(FormatErrc::dimension, "header declares " + std::to_string(h.total_size) +
                                                 " bytes but the file holds " + std::to_string(file_size));
  }
  bytes.resize(h.total_size);
  in.read(reinterpret_cast<char*>(bytes.data() + kIndexFixedHeader),
          static_cast<std::streamsize>(h.total_size - kIndexFixedHeader));
  if (!in) throw Error(Errc::io, "read error on " + path.string());
  return decode_index(bytes);
}

}  // namespace patchknn
