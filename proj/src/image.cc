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

#include <png.h>

#include <utility>

#include "fiberlab/errors.h"
#include "fiberlab/image.h"

namespace fiberlab {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("image dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("image dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidInputError("pixel buffer does not match image dimensions");
  }
}

GrayImage ReadPng(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&png, path.c_str()) == 0) {
    throw IoError("cannot read " + path + ": " + png.message);
  }
  png.format = PNG_FORMAT_GRAY;
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    throw IoError(path + ": empty image");
  }
  GrayImage image(static_cast<int>(png.width), static_cast<int>(png.height));
  if (png_image_finish_read(&png, nullptr, image.mutable_pixels().data(), 0, nullptr) == 0) {
    const std::string message = png.message;
    png_image_free(&png);
    throw IoError("cannot decode " + path + ": " + message);
  }
  return image;
}

void WritePng(const GrayImage& image, const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_GRAY;
  if (png_image_write_to_file(&png, path.c_str(), 0, image.pixels().data(), 0, nullptr) == 0) {
    throw IoError("cannot write " + path + ": " + png.message);
  }
}

RasterMask ReadMaskPng(const std::string& path) {
  const GrayImage image = ReadPng(path);
  RasterMask mask(image.width(), image.height());
  for (std::size_t i = 0; i < image.pixels().size(); ++i) {
    mask.mutable_bits()[i] = image.pixels()[i] != 0 ? 1 : 0;
  }
  return mask;
}

void WriteMaskPng(const RasterMask& mask, const std::string& path) {
  GrayImage image(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.bits().size(); ++i) {
    image.mutable_pixels()[i] = mask.bits()[i] != 0 ? 255 : 0;
  }
  WritePng(image, path);
}

}  // namespace fiberlab
