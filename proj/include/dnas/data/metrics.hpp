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

#pragma once

#include "dnas/tensor/tensor.hpp"

namespace dnas::data {

/// 10 log10(peak^2 / MSE) in dB; +infinity when the inputs are identical.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

/// Mean SSIM over all valid window positions, channels and images.
/// Accepts [C,H,W] or [N,C,H,W]; H and W must be at least the window size.
double ssim(const Tensor& a, const Tensor& b, const SsimOptions& options = {});

}  // namespace dnas::data
