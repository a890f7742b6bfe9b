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

#include "patchknn/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "patchknn/error.hpp"

namespace patchknn {

GrayImage::GrayImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height_ == 0 || width_ == 0) {
    throw Error(Errc::decode, "image has zero area");
  }
  if (pixels_.size() != height_ * width_) {
    throw Error(Errc::decode, "pixel buffer size " + std::to_string(pixels_.size()) + " does not match " +
                                  std::to_string(height_) + "x" + std::to_string(width_));
  }
}

GrayImage::GrayImage(std::size_t height, std::size_t width, std::uint8_t fill)
    : GrayImage(height, width, std::vector<std::uint8_t>(height * width, fill)) {}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(y), 0, 255));
}

GrayImage to_grayscale(const Raster& image) {
  if (image.height == 0 || image.width == 0) {
    throw Error(Errc::decode, "image has zero area");
  }
  if (image.channels == 1) {
    return GrayImage(image.height, image.width, image.pixels);
  }
  if (image.channels != 3) {
    throw Error(Errc::decode, "unsupported channel count " + std::to_string(image.channels));
  }
  std::vector<std::uint8_t> gray(image.height * image.width);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const std::uint8_t* px = image.pixels.data() + 3 * i;
    gray[i] = luma(px[0], px[1], px[2]);
  }
  return GrayImage(image.height, image.width, std::move(gray));
}

Raster to_raster(const GrayImage& image) {
  return Raster{image.height(), image.width(), 1, {image.pixels().begin(), image.pixels().end()}};
}

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

Raster decode_png(std::span<const std::uint8_t> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()) == 0) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error(Errc::decode, "png: " + msg);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Raster out{png.height, png.width, color ? 3u : 1u, {}};
  if (out.height == 0 || out.width == 0) {
    png_image_free(&png);
    throw Error(Errc::decode, "png: zero-area image");
  }
  out.pixels.resize(PNG_IMAGE_SIZE(png));
  if (png_image_finish_read(&png, nullptr, out.pixels.data(), 0, nullptr) == 0) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error(Errc::decode, "png: " + msg);
  }
  return out;
}

// Binary PGM: "P5" <ws> width <ws> height <ws> maxval <single ws> raster.
// '#' comments may appear between header tokens.
Raster decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto next_token = [&]() -> std::size_t {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (++digits > 9) throw Error(Errc::decode, "pgm: header value too large");
      ++pos;
    }
    if (digits == 0) throw Error(Errc::decode, "pgm: malformed header");
    return value;
  };
  const std::size_t width = next_token();
  const std::size_t height = next_token();
  const std::size_t maxval = next_token();
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(Errc::decode, "pgm: malformed header");
  }
  ++pos;
  if (width == 0 || height == 0) throw Error(Errc::decode, "pgm: zero-area image");
  if (maxval == 0 || maxval > 255) {
    throw Error(Errc::decode, "pgm: only 8-bit maxval (1..255) is supported, got " + std::to_string(maxval));
  }
  if (bytes.size() - pos < width * height) {
    throw Error(Errc::decode, "pgm: truncated raster");
  }
  Raster out{height, width, 1, {}};
  out.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + width * height));
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Raster decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= sizeof kPngSignature && std::memcmp(bytes.data(), kPngSignature, sizeof kPngSignature) == 0) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return decode_pgm(bytes);
  }
  throw Error(Errc::decode, bytes.empty() ? "empty image data" : "unrecognized image format (expected PNG or P5 PGM)");
}

Raster read_image(const std::filesystem::path& path) { return decode_image(read_bytes(path)); }

std::vector<std::uint8_t> encode_png(const Raster& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(Errc::invalid_params, "png: unsupported channel count");
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr) == 0) {
    throw Error(Errc::io, std::string("png: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr) == 0) {
    throw Error(Errc::io, std::string("png: ") + png.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::filesystem::path& path, const Raster& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "short write to " + path.string());
}

Raster annotate(const Raster& image, std::span<const Rect> rects, Rgb color) {
  Raster out{image.height, image.width, 3, {}};
  out.pixels.resize(image.height * image.width * 3);
  for (std::size_t i = 0; i < image.height * image.width; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      out.pixels[3 * i + c] = image.pixels[image.channels == 3 ? 3 * i + c : i];
    }
  }
  auto paint = [&](std::size_t row, std::size_t col) {
    std::uint8_t* px = out.at(row, col);
    px[0] = color.r;
    px[1] = color.g;
    px[2] = color.b;
  };
  for (const Rect& r : rects) {
    if (r.size == 0) continue;
    if (r.x + r.size > image.height || r.y + r.size > image.width) {
      throw Error(Errc::out_of_bounds, "rectangle outside image");
    }
    const std::size_t bottom = r.x + r.size - 1;
    const std::size_t right = r.y + r.size - 1;
    for (std::size_t c = r.y; c <= right; ++c) {
      paint(r.x, c);
      paint(bottom, c);
    }
    for (std::size_t row = r.x; row <= bottom; ++row) {
      paint(row, r.y);
      paint(row, right);
    }
  }
  return out;
}

}  // namespace patchknn
