// Copyright 2026 The fiberlab Authors. All Rights Reserved.
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

#ifndef FIBERLAB_IMAGE_H_
#define FIBERLAB_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fiberlab/geometry.h"

namespace fiberlab {

// Row-major 8-bit grayscale image.
class GrayImage {
 public:
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t at(int x, int y) const { return pixels_[Index(x, y)]; }
  void set(int x, int y, std::uint8_t v) { pixels_[Index(x, y)] = v; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> mutable_pixels() { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

// 8-bit grayscale PNG. Color or 16-bit inputs are converted on read.
GrayImage ReadPng(const std::string& path);
void WritePng(const GrayImage& image, const std::string& path);

// Masks travel as PNG with 0 for background and 255 for foreground; any
// nonzero pixel reads as foreground.
RasterMask ReadMaskPng(const std::string& path);
void WriteMaskPng(const RasterMask& mask, const std::string& path);

}  // namespace fiberlab

#endif  // FIBERLAB_IMAGE_H_
