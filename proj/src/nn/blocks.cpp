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

#include "dnas/nn/blocks.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace dnas::nn {

std::string_view block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::kAlt0: return "Alt0";
    case BlockKind::kAlt1: return "Alt1";
    case BlockKind::kAlt2: return "Alt2";
    case BlockKind::kAlt3: return "Alt3";
  }
  return "?";
}

BlockKind parse_block_kind(std::string_view text) {
  for (BlockKind k : kAllBlockKinds) {
    if (block_kind_name(k) == text) return k;
  }
  throw std::invalid_argument(fmt::format("unknown block kind '{}'", text));
}

std::string CandidateSpec::id() const {
  return fmt::format("{}x{}", count, block_kind_name(kind));
}

CandidateSpec CandidateSpec::parse(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos || x == 0) {
    throw std::invalid_argument(
        fmt::format("candidate '{}' is not of the form <count>x<kind>", text));
  }
  std::size_t count = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + x, count);
  if (ec != std::errc() || ptr != text.data() + x || count == 0) {
    throw std::invalid_argument(
        fmt::format("candidate '{}' has an invalid count", text));
  }
  return {parse_block_kind(text.substr(x + 1)), count};
}

Tensor ConvLayer::forward(const Tensor& x) const {
  return ops::conv2d(x, weight, bias, options);
}

void ConvLayer::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight, true});
  if (bias.defined()) out.push_back({prefix + ".bias", bias, true});
}

ConvLayer make_conv(std::size_t in_channels, std::size_t out_channels,
                    std::size_t kernel, ops::Conv2dOptions options, bool bias,
                    Rng& rng, bool zero_init) {
  const std::size_t fan_in = in_channels / options.groups * kernel * kernel;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto draw = [&](std::size_t n) {
    std::vector<real_t> v(n, real_t{0});
    // Draw even when zeroing so later layers see the same random stream.
    for (auto& x : v) {
      const double s = dist(rng);
      if (!zero_init) x = static_cast<real_t>(s);
    }
    return v;
  };
  ConvLayer layer;
  layer.options = options;
  layer.weight = Tensor({out_channels, in_channels / options.groups, kernel, kernel},
                        draw(out_channels * in_channels / options.groups * kernel * kernel),
                        true);
  if (bias) layer.bias = Tensor({out_channels}, draw(out_channels), true);
  return layer;
}

Tensor LayerNormLayer::forward(const Tensor& x) const {
  return ops::layer_norm(x, gamma, beta, eps, axes);
}

void LayerNormLayer::collect(const std::string& prefix,
                             ParameterList& out) const {
  out.push_back({prefix + ".gamma", gamma, true});
  out.push_back({prefix + ".beta", beta, true});
}

Tensor BatchNormLayer::forward(const Tensor& x, Mode mode) {
  return ops::batch_norm(x, running_mean, running_var, gamma, beta,
                         {.eps = eps,
                          .momentum = momentum,
                          .training = mode == Mode::kTrain});
}

void BatchNormLayer::collect(const std::string& prefix,
                             ParameterList& out) const {
  out.push_back({prefix + ".gamma", gamma, true});
  out.push_back({prefix + ".beta", beta, true});
  out.push_back({prefix + ".running_mean", running_mean, false});
  out.push_back({prefix + ".running_var", running_var, false});
}

BatchNormLayer make_batch_norm(std::size_t channels, real_t eps,
                               real_t momentum) {
  BatchNormLayer bn;
  bn.gamma = Tensor::full({channels}, 1, true);
  bn.beta = Tensor::zeros({channels}, true);
  bn.running_mean = Tensor::zeros({channels});
  bn.running_var = Tensor::full({channels}, 1);
  bn.eps = eps;
  bn.momentum = momentum;
  return bn;
}

ConvLayer fold_conv_bn(const ConvLayer& conv, const BatchNormLayer& bn) {
  const std::size_t out_ch = conv.out_channels();
  if (bn.gamma.numel() != out_ch) {
    throw ShapeError(fmt::format(
        "fold_conv_bn: batch norm has {} channels, conv produces {}",
        bn.gamma.numel(), out_ch));
  }
  const auto w = conv.weight.data();
  const std::size_t per_out = w.size() / out_ch;
  const auto mean = bn.running_mean.data();
  const auto var = bn.running_var.data();
  const auto gamma = bn.gamma.data();
  const auto beta = bn.beta.data();

  std::vector<real_t> folded_w(w.begin(), w.end());
  std::vector<real_t> folded_b(out_ch);
  for (std::size_t o = 0; o < out_ch; ++o) {
    const real_t denom = var[o] + bn.eps;
    if (!(denom > 0)) {
      throw std::invalid_argument(fmt::format(
          "fold_conv_bn: var + eps = {} for channel {} is not positive", denom,
          o));
    }
    const real_t k = gamma[o] / std::sqrt(denom);
    for (std::size_t i = 0; i < per_out; ++i) folded_w[o * per_out + i] *= k;
    const real_t b = conv.bias.defined() ? conv.bias.data()[o] : real_t{0};
    folded_b[o] = (b - mean[o]) * k + beta[o];
  }
  ConvLayer out;
  out.options = conv.options;
  out.weight = Tensor(conv.weight.shape(), std::move(folded_w));
  out.bias = Tensor({out_ch}, std::move(folded_b));
  return out;
}

NafBlock::NafBlock(BlockKind kind, std::size_t channels,
                   const BlockOptions& options, InitScheme init, Rng& rng)
    : kind_(kind), channels_(channels) {
  if (kind == BlockKind::kAlt3) {
    throw std::invalid_argument("NafBlock cannot represent Alt3");
  }
  const std::size_t wide = channels * options.expand_ratio;
  const std::size_t ffn = channels * options.ffn_ratio;
  if (channels == 0 || wide % 2 != 0 || ffn % 2 != 0) {
    throw ShapeError(fmt::format(
        "NAF block with {} channels: simple gate needs an even channel count "
        "(expanded widths {} and {})",
        channels, wide, ffn));
  }
  auto make_norm = [&] {
    return LayerNormLayer{Tensor::full({channels}, 1, true),
                          Tensor::zeros({channels}, true), options.norm_eps,
                          options.norm_axes};
  };
  if (kind != BlockKind::kAlt1) norm1 = make_norm();
  expand = make_conv(channels, wide, 1, {}, true, rng);
  depthwise = make_conv(wide, wide, 3, {.padding = 1, .groups = wide}, true, rng);
  if (kind != BlockKind::kAlt2) {
    attention = make_conv(wide / 2, wide / 2, 1, {}, true, rng);
  }
  project = make_conv(wide / 2, channels, 1, {}, true, rng, true);
  if (kind != BlockKind::kAlt1) norm2 = make_norm();
  ffn_expand = make_conv(channels, ffn, 1, {}, true, rng);
  ffn_project = make_conv(ffn / 2, channels, 1, {}, true, rng, true);
  (void)init;  // Both schemes zero the branch outputs of a NAF block.
}

Tensor NafBlock::forward(const Tensor& x, Mode) {
  Tensor y = norm1 ? norm1->forward(x) : x;
  y = expand.forward(y);
  y = depthwise.forward(y);
  y = ops::simple_gate(y);
  if (attention) {
    y = ops::mul_channelwise(y, attention->forward(ops::global_avg_pool(y)));
  }
  y = project.forward(y);
  const Tensor mid = ops::add(x, y);

  y = norm2 ? norm2->forward(mid) : mid;
  y = ffn_expand.forward(y);
  y = ops::simple_gate(y);
  y = ffn_project.forward(y);
  return ops::add(mid, y);
}

void NafBlock::collect(const std::string& prefix, ParameterList& out) const {
  if (norm1) norm1->collect(prefix + ".norm1", out);
  expand.collect(prefix + ".expand", out);
  depthwise.collect(prefix + ".depthwise", out);
  if (attention) attention->collect(prefix + ".attention", out);
  project.collect(prefix + ".project", out);
  if (norm2) norm2->collect(prefix + ".norm2", out);
  ffn_expand.collect(prefix + ".ffn_expand", out);
  ffn_project.collect(prefix + ".ffn_project", out);
}

ConvBnReluBlock::ConvBnReluBlock(std::size_t channels,
                                 const BlockOptions& options, InitScheme init,
                                 Rng& rng)
    : channels_(channels) {
  const std::size_t k = options.alt3_kernel;
  if (k % 2 == 0) {
    throw std::invalid_argument(
        fmt::format("Alt3 kernel must be odd to preserve size, got {}", k));
  }
  conv = make_conv(channels, channels, k, {.padding = k / 2}, true, rng,
                   init == InitScheme::kIdentity);
  bn = make_batch_norm(channels, options.bn_eps, options.bn_momentum);
}

Tensor ConvBnReluBlock::forward(const Tensor& x, Mode mode) {
  return ops::add(x, ops::relu(bn.forward(conv.forward(x), mode)));
}

void ConvBnReluBlock::collect(const std::string& prefix,
                              ParameterList& out) const {
  conv.collect(prefix + ".conv", out);
  bn.collect(prefix + ".bn", out);
}

ConvLayer ConvBnReluBlock::folded() const { return fold_conv_bn(conv, bn); }

Tensor ConvBnReluBlock::forward_folded(const Tensor& x) const {
  return ops::add(x, ops::relu(folded().forward(x)));
}

std::unique_ptr<Block> make_block(BlockKind kind, std::size_t channels,
                                  const BlockOptions& options, InitScheme init,
                                  Rng& rng) {
  if (kind == BlockKind::kAlt3) {
    return std::make_unique<ConvBnReluBlock>(channels, options, init, rng);
  }
  return std::make_unique<NafBlock>(kind, channels, options, init, rng);
}

}  // namespace dnas::nn
