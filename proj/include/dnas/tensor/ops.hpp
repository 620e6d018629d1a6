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

#include <span>
#include <utility>

#include "dnas/tensor/tensor.hpp"

// Differentiable primitives. Image tensors use the NCHW layout.
namespace dnas::ops {

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t groups = 1;
};

/// Cross-correlation (no kernel flip). `kernel` is [Cout, Cin/groups, kH, kW];
/// `bias` is [Cout] or undefined.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              const Conv2dOptions& options = {});

/// Axes a layer norm reduces over.
enum class NormAxes {
  kSample,   // (C, H, W) per sample
  kChannel,  // C per spatial position
};

/// `gamma`/`beta` are [C] and applied per channel after normalization.
Tensor layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  real_t eps, NormAxes axes = NormAxes::kSample);

struct BatchNormOptions {
  real_t eps = 1e-5;
  // running = momentum * running + (1 - momentum) * batch_statistic
  real_t momentum = 0.9;
  bool training = false;
};

/// Per-channel batch normalization. In training mode batch statistics are
/// used and the running buffers are updated in place; otherwise the running
/// statistics are used.
Tensor batch_norm(const Tensor& input, Tensor& running_mean,
                  Tensor& running_var, const Tensor& gamma, const Tensor& beta,
                  const BatchNormOptions& options = {});

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& x, real_t value);
Tensor mul_scalar(const Tensor& x, real_t value);
/// x * s where `s` holds a single element.
Tensor scale(const Tensor& x, const Tensor& s);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
/// x log x with the 0 log 0 = 0 convention.
Tensor xlogx(const Tensor& x);

/// Splits [N, C, H, W] into the first and second C/2 channels.
std::pair<Tensor, Tensor> split_halves_channelwise(const Tensor& x);
/// Product of the two channel halves.
Tensor simple_gate(const Tensor& x);

/// [N, C, H, W] -> [N, C, 1, 1].
Tensor global_avg_pool(const Tensor& x);
/// x [N, C, H, W] scaled by s [N, C, 1, 1].
Tensor mul_channelwise(const Tensor& x, const Tensor& s);
/// [N, C r^2, H, W] -> [N, C, H r, W r].
Tensor pixel_shuffle(const Tensor& x, std::size_t factor);

/// softmax(v / temperature) over a 1-D tensor.
Tensor softmax(const Tensor& logits, real_t temperature = 1);
/// Element `index` of a 1-D tensor as a one-element tensor.
Tensor select(const Tensor& v, std::size_t index);
/// sum_i weights[i] * xs[i]; all xs share one shape, weights is 1-D of size
/// xs.size().
Tensor weighted_sum(std::span<const Tensor> xs, const Tensor& weights);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// mean((a - b)^2)
Tensor mse_loss(const Tensor& a, const Tensor& b);

}  // namespace dnas::ops
