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

#include "dnas/data/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

namespace dnas::data {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(fmt::format("{}: shapes {} and {} differ", what, shape_to_string(a.shape()),
                                 shape_to_string(b.shape())));
  }
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> w(size);
  const double centre = (static_cast<double>(size) - 1) / 2;
  double total = 0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - centre;
    w[i] = std::exp(-d * d / (2 * sigma * sigma));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

// Valid-mode separable filtering of one H x W plane.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size(), oh = h - n + 1, ow = w - n + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * img[y * w + x + i];
      rows[y * ow + x] = s;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b, double peak) {
  require_same_shape(a, b, "psnr");
  if (a.numel() == 0) throw std::invalid_argument("psnr of empty tensors");
  const auto da = a.data(), db = b.data();
  double sse = 0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
    sse += d * d;
  }
  if (sse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / (sse / static_cast<double>(da.size())));
}

double ssim(const Tensor& a, const Tensor& b, const SsimOptions& o) {
  require_same_shape(a, b, "ssim");
  if (a.rank() != 3 && a.rank() != 4) {
    throw ShapeError(fmt::format("ssim expects [C,H,W] or [N,C,H,W], got {}", shape_to_string(a.shape())));
  }
  const std::size_t h = a.dim(a.rank() - 2), w = a.dim(a.rank() - 1);
  if (h < o.window || w < o.window) {
    throw std::invalid_argument(
        fmt::format("ssim: image {}x{} is smaller than the {}x{} window", h, w, o.window, o.window));
  }
  const auto k = gaussian_window(o.window, o.sigma);
  const double c1 = (o.k1 * o.peak) * (o.k1 * o.peak);
  const double c2 = (o.k2 * o.peak) * (o.k2 * o.peak);
  const std::size_t planes = a.numel() / (h * w);
  const auto da = a.data(), db = b.data();

  double total = 0;
  std::size_t count = 0;
  std::vector<double> x(h * w), y(h * w), xx(h * w), yy(h * w), xy(h * w);
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t i = 0; i < h * w; ++i) {
      x[i] = da[p * h * w + i];
      y[i] = db[p * h * w + i];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, k), my = filter_valid(y, h, w, k);
    const auto exx = filter_valid(xx, h, w, k), eyy = filter_valid(yy, h, w, k);
    const auto exy = filter_valid(xy, h, w, k);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = exx[i] - mx[i] * mx[i];
      const double vy = eyy[i] - my[i] * my[i];
      const double cxy = exy[i] - mx[i] * my[i];
      total += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace dnas::data
