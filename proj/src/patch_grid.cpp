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

#include "patchknn/patch_grid.hpp"

#include <algorithm>
#include <string>

#include "patchknn/error.hpp"

namespace patchknn {

GridShape GridShape::make(std::size_t image_height, std::size_t image_width, std::size_t patch_size) {
  if (image_height == 0 || image_width == 0) {
    throw Error(Errc::decode, "image has zero area");
  }
  if (patch_size < 2 || patch_size > std::min(image_height, image_width)) {
    throw Error(Errc::invalid_patch_size, "patch size " + std::to_string(patch_size) + " must lie in [2, " +
                                              std::to_string(std::min(image_height, image_width)) + "] for a " +
                                              std::to_string(image_height) + "x" + std::to_string(image_width) +
                                              " image");
  }
  return GridShape{image_height, image_width, patch_size};
}

PatchCoords clamp_to_grid(std::int64_t x, std::int64_t y, const GridShape& grid) {
  if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= grid.image_height ||
      static_cast<std::size_t>(y) >= grid.image_width) {
    throw Error(Errc::out_of_bounds, "pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                                         ") lies outside the " + std::to_string(grid.image_height) + "x" +
                                         std::to_string(grid.image_width) + " image; valid top-left range is x in [0, " +
                                         std::to_string(grid.grid_height() - 1) + "], y in [0, " +
                                         std::to_string(grid.grid_width() - 1) + "]");
  }
  return {std::min(static_cast<std::size_t>(x), grid.grid_height() - 1),
          std::min(static_cast<std::size_t>(y), grid.grid_width() - 1)};
}

std::size_t patch_id(std::int64_t x, std::int64_t y, const GridShape& grid) {
  const PatchCoords c = clamp_to_grid(x, y, grid);
  return c.x * grid.grid_width() + c.y;
}

PatchCoords patch_coords(std::size_t t, const GridShape& grid) {
  if (t >= grid.patch_count()) {
    throw Error(Errc::out_of_bounds,
                "patch id " + std::to_string(t) + " out of range [0, " + std::to_string(grid.patch_count()) + ")");
  }
  return {t / grid.grid_width(), t % grid.grid_width()};
}

PatchView::PatchView(const GrayImage& image, std::size_t x, std::size_t y, std::size_t size, std::size_t id)
    : origin_(image.pixels().data() + x * image.width() + y),
      stride_(image.width()),
      x_(x),
      y_(y),
      size_(size),
      id_(id) {
  if (size == 0 || x + size > image.height() || y + size > image.width()) {
    throw Error(Errc::out_of_bounds, "patch window outside image");
  }
}

PatchView PatchView::whole(const GrayImage& image) {
  if (image.height() != image.width()) {
    throw Error(Errc::invalid_patch_size, "whole-image patch requires a square image");
  }
  return PatchView(image, 0, 0, image.height());
}

GrayImage PatchView::copy() const {
  std::vector<std::uint8_t> px;
  px.reserve(size_ * size_);
  for (std::size_t i = 0; i < size_; ++i) {
    px.insert(px.end(), origin_ + i * stride_, origin_ + i * stride_ + size_);
  }
  return GrayImage(size_, size_, std::move(px));
}

PatchGrid::PatchGrid(GrayImage image, std::size_t patch_size)
    : image_(std::move(image)), shape_(GridShape::make(image_.height(), image_.width(), patch_size)) {}

PatchView PatchGrid::patch(std::size_t t) const {
  const PatchCoords c = patch_coords(t, shape_);
  return PatchView(image_, c.x, c.y, shape_.patch_size, t);
}

}  // namespace patchknn
