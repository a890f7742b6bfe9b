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

namespace patchknn {

/// Decoded pixel raster, either 1 channel (gray) or 3 channels (RGB),
/// row-major and interleaved.
struct Raster {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t* at(std::size_t row, std::size_t col) { return pixels.data() + (row * width + col) * channels; }
  const std::uint8_t* at(std::size_t row, std::size_t col) const {
    return pixels.data() + (row * width + col) * channels;
  }
  bool operator==(const Raster&) const = default;
};

/// 8-bit luminance image of height M and width N, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels);
  GrayImage(std::size_t height, std::size_t width, std::uint8_t fill = 0);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::uint8_t at(std::size_t row, std::size_t col) const noexcept { return pixels_[row * width_ + col]; }
  std::uint8_t& at(std::size_t row, std::size_t col) noexcept { return pixels_[row * width_ + col]; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// BT.601 luma, rounded to nearest and clamped to [0, 255].
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Gray rasters pass through unchanged; RGB rasters are reduced with luma().
GrayImage to_grayscale(const Raster& image);

/// Single-channel raster holding the same pixels.
Raster to_raster(const GrayImage& image);

/// Decodes PNG or binary PGM (P5, maxval <= 255), sniffed from the leading bytes.
/// Throws Error(Errc::decode) on anything else.
Raster decode_image(std::span<const std::uint8_t> bytes);
Raster read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Raster& image);
void write_png(const std::filesystem::path& path, const Raster& image);

struct Rgb {
  std::uint8_t r = 255;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

/// Square patch window: top-left (row x, column y) and side length.
struct Rect {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t size = 0;
};

/// Returns an RGB copy of `image` with a 1-pixel outline drawn for each rect.
/// Rectangles must lie inside the image.
Raster annotate(const Raster& image, std::span<const Rect> rects, Rgb color = {});

}  // namespace patchknn
