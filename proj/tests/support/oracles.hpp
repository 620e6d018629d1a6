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

// Test-only reference implementations. Nothing here calls into the op
// kernels it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "dnas/tensor/tensor.hpp"

namespace dnas::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0,
                            bool requires_grad = false) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<real_t> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<real_t>(dist(rng));
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
inline double max_relative_error(std::span<const double> a,
                                 std::span<const double> b,
                                 double floor = 1e-6) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

inline double max_abs_diff(std::span<const real_t> a, std::span<const real_t> b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i] - b[i])));
  }
  return worst;
}

/// Central differences of `loss()` w.r.t. selected elements of `leaf`
/// (all elements when `indices` is empty). The leaf is perturbed in place
/// and restored.
inline std::vector<double> numeric_gradient(Tensor& leaf,
                                            const std::function<double()>& loss,
                                            std::vector<std::size_t> indices = {},
                                            double h = 1e-5) {
  if (indices.empty()) {
    indices.resize(leaf.numel());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  }
  std::vector<double> out;
  out.reserve(indices.size());
  auto data = leaf.mutable_data();
  for (std::size_t i : indices) {
    const real_t saved = data[i];
    data[i] = saved + static_cast<real_t>(h);
    const double up = loss();
    data[i] = saved - static_cast<real_t>(h);
    const double down = loss();
    data[i] = saved;
    out.push_back((up - down) / (2 * h));
  }
  return out;
}

inline std::vector<double> pick(std::span<const real_t> values,
                                const std::vector<std::size_t>& indices) {
  std::vector<double> out;
  if (indices.empty()) {
    out.assign(values.begin(), values.end());
    return out;
  }
  for (std::size_t i : indices) out.push_back(values[i]);
  return out;
}

/// Direct nested-loop cross-correlation.
inline std::vector<double> naive_conv2d(const Tensor& input, const Tensor& kernel,
                                        const Tensor& bias, std::size_t stride,
                                        std::size_t pad, std::size_t groups) {
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2),
                    w = input.dim(3);
  const std::size_t o = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1;
  const std::size_t ow = (w + 2 * pad - kw) / stride + 1;
  const std::size_t cg = c / groups, og = o / groups;
  auto x = input.data();
  auto k = kernel.data();
  std::vector<double> out(n * o * oh * ow, 0.0);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t oc = 0; oc < o; ++oc)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xx = 0; xx < ow; ++xx) {
          double acc = bias.defined() ? bias.data()[oc] : 0.0;
          const std::size_t g = oc / og;
          for (std::size_t icg = 0; icg < cg; ++icg)
            for (std::size_t i = 0; i < kh; ++i)
              for (std::size_t j = 0; j < kw; ++j) {
                const long iy = static_cast<long>(y * stride + i) - static_cast<long>(pad);
                const long ix = static_cast<long>(xx * stride + j) - static_cast<long>(pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) ||
                    ix >= static_cast<long>(w))
                  continue;
                const std::size_t ic = g * cg + icg;
                acc += x[((b * c + ic) * h + iy) * w + ix] *
                       k[((oc * cg + icg) * kh + i) * kw + j];
              }
          out[((b * o + oc) * oh + y) * ow + xx] = acc;
        }
  return out;
}

}  // namespace dnas::testing
