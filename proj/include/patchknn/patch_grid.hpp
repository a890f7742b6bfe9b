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
#include <utility>

#include "patchknn/image.hpp"

namespace patchknn {

/// Dimensions of a dense stride-1 patch grid. Patch ids are row-major over
/// the grid of valid top-left positions, so ids use the grid width
/// (N - p + 1), not the image width.
struct GridShape {
  std::size_t image_height = 0;  // M
  std::size_t image_width = 0;   // N
  std::size_t patch_size = 0;    // p

  /// Throws Error(Errc::invalid_patch_size) unless 2 <= p <= min(M, N).
  static GridShape make(std::size_t image_height, std::size_t image_width, std::size_t patch_size);

  std::size_t grid_height() const noexcept { return image_height - patch_size + 1; }
  std::size_t grid_width() const noexcept { return image_width - patch_size + 1; }
  std::size_t patch_count() const noexcept { return grid_height() * grid_width(); }

  bool operator==(const GridShape&) const = default;
};

struct PatchCoords {
  std::size_t x = 0;  // row of the top-left pixel
  std::size_t y = 0;  // column of the top-left pixel
  bool operator==(const PatchCoords&) const = default;
};

/// Clamps an in-image pixel to the nearest valid top-left position.
/// Throws Error(Errc::out_of_bounds) if the pixel is outside the image.
PatchCoords clamp_to_grid(std::int64_t x, std::int64_t y, const GridShape& grid);

/// t = x * GW + y, after clamping (x, y) into the grid.
std::size_t patch_id(std::int64_t x, std::int64_t y, const GridShape& grid);

/// Inverse of patch_id. Throws Error(Errc::out_of_bounds) when t >= N_p.
PatchCoords patch_coords(std::size_t t, const GridShape& grid);

/// Non-owning p x p window into a GrayImage. Valid while the image lives.
class PatchView {
 public:
  PatchView(const GrayImage& image, std::size_t x, std::size_t y, std::size_t size, std::size_t id = 0);

  /// The whole image as a single patch. Requires a square image.
  static PatchView whole(const GrayImage& image);

  std::size_t id() const noexcept { return id_; }
  std::size_t x() const noexcept { return x_; }
  std::size_t y() const noexcept { return y_; }
  std::size_t size() const noexcept { return size_; }
  std::uint8_t at(std::size_t i, std::size_t j) const noexcept { return origin_[i * stride_ + j]; }

  /// Copies the window out, row-major.
  GrayImage copy() const;

 private:
  const std::uint8_t* origin_;
  std::size_t stride_;
  std::size_t x_;
  std::size_t y_;
  std::size_t size_;
  std::size_t id_;
};

/// All overlapping p x p patches of an image.
class PatchGrid {
 public:
  PatchGrid(GrayImage image, std::size_t patch_size);

  const GrayImage& image() const noexcept { return image_; }
  const GridShape& shape() const noexcept { return shape_; }
  std::size_t patch_size() const noexcept { return shape_.patch_size; }
  std::size_t size() const noexcept { return shape_.patch_count(); }

  PatchView patch(std::size_t t) const;

 private:
  GrayImage image_;
  GridShape shape_;
};

inline PatchGrid extract_patches(GrayImage image, std::size_t patch_size) {
  return PatchGrid(std::move(image), patch_size);
}

}  // namespace patchknn
