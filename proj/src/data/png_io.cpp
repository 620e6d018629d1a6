// Copyright 2026 The dnas Authors. All Rights Reserved.
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

#include "dnas/data/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

namespace dnas::data {

Tensor read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw std::runtime_error(fmt::format("cannot read PNG '{}': {}", path.string(), image.message));
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw std::runtime_error(fmt::format("cannot decode PNG '{}': {}", path.string(), msg));
  }
  const std::size_t h = image.height, w = image.width;
  std::vector<real_t> out(3 * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        out[(c * h + y) * w + x] = static_cast<real_t>(buf[(y * w + x) * 3 + c]) / 255;
      }
    }
  }
  return Tensor({3, h, w}, std::move(out));
}

void write_png(const std::filesystem::path& path, const Tensor& t) {
  if (t.rank() != 3 || (t.dim(0) != 3 && t.dim(0) != 1)) {
    throw ShapeError(fmt::format("write_png expects [3,H,W] or [1,H,W], got {}", shape_to_string(t.shape())));
  }
  const std::size_t c = t.dim(0), h = t.dim(1), w = t.dim(2);
  std::vector<png_byte> buf(c * h * w);
  const auto d = t.data();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t k = 0; k < c; ++k) {
        const double v = std::clamp(static_cast<double>(d[(k * h + y) * w + x]), 0.0, 1.0);
        buf[(y * w + x) * c + k] = static_cast<png_byte>(std::lround(v * 255));
      }
    }
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = c == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw std::runtime_error(fmt::format("cannot write PNG '{}': {}", path.string(), image.message));
  }
}

}  // namespace dnas::data
