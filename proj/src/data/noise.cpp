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

#include "dnas/data/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace dnas::data {

Tensor gaussian_noise(const Shape& shape, double sigma_255, std::uint64_t seed) {
  if (!(sigma_255 >= 0) || !std::isfinite(sigma_255)) {
    throw std::invalid_argument(fmt::format("noise sigma must be non-negative, got {}", sigma_255));
  }
  std::vector<real_t> v(shape_numel(shape), real_t{0});
  if (sigma_255 > 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma_255 / 255.0);
    for (auto& x : v) x = static_cast<real_t>(dist(rng));
  }
  return Tensor(shape, std::move(v));
}

Tensor add_gaussian_noise(const Tensor& clean, double sigma_255, std::uint64_t seed) {
  const Tensor noise = gaussian_noise(clean.shape(), sigma_255, seed);
  const auto c = clean.data();
  const auto n = noise.data();
  std::vector<real_t> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] = std::clamp<real_t>(c[i] + n[i], 0, 1);
  }
  return Tensor(clean.shape(), std::move(out));
}

}  // namespace dnas::data
