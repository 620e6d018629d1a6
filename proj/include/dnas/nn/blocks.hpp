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

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dnas/tensor/ops.hpp"

namespace dnas::nn {

using Rng = std::mt19937_64;

/// The four interchangeable block types of the search space.
///   Alt0: NAF block (layer norm, depthwise conv, simple gate, channel
///         attention, two residual branches)
///   Alt1: Alt0 without the layer norms
///   Alt2: Alt0 without the channel attention
///   Alt3: Conv -> BatchNorm -> ReLU with a residual connection
enum class BlockKind { kAlt0, kAlt1, kAlt2, kAlt3 };

inline constexpr std::array<BlockKind, 4> kAllBlockKinds = {
    BlockKind::kAlt0, BlockKind::kAlt1, BlockKind::kAlt2, BlockKind::kAlt3};

std::string_view block_kind_name(BlockKind kind);
BlockKind parse_block_kind(std::string_view text);

/// `count` stacked blocks of one kind, written "<count>x<kind>" (e.g. 2xAlt3).
struct CandidateSpec {
  BlockKind kind = BlockKind::kAlt0;
  std::size_t count = 1;

  std::string id() const;
  static CandidateSpec parse(std::string_view text);
  friend bool operator==(const CandidateSpec&, const CandidateSpec&) = default;
};

enum class Mode { kTrain, kEval };

/// kTraining zero-initializes the last conv of every NAF branch (each NAF
/// block starts as the identity); kIdentity additionally zeroes the Alt3
/// conv so every block kind is the identity map.
enum class InitScheme { kTraining, kIdentity };

struct BlockOptions {
  ops::NormAxes norm_axes = ops::NormAxes::kSample;
  real_t norm_eps = 1e-6;
  real_t bn_eps = 1e-5;
  real_t bn_momentum = 0.9;
  std::size_t expand_ratio = 2;
  std::size_t ffn_ratio = 2;
  // Spatial kernel of the Alt3 convolution (odd; padding k/2).
  std::size_t alt3_kernel = 1;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
  bool trainable = true;
};
using ParameterList = std::vector<NamedTensor>;

struct ConvLayer {
  Tensor weight;  // [Cout, Cin/groups, k, k]
  Tensor bias;    // [Cout] or undefined
  ops::Conv2dOptions options;

  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;
  std::size_t in_channels() const { return weight.dim(1) * options.groups; }
  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t kernel_size() const { return weight.dim(2); }
};

ConvLayer make_conv(std::size_t in_channels, std::size_t out_channels,
                    std::size_t kernel, ops::Conv2dOptions options, bool bias,
                    Rng& rng, bool zero_init = false);

struct LayerNormLayer {
  Tensor gamma;
  Tensor beta;
  real_t eps = 1e-6;
  ops::NormAxes axes = ops::NormAxes::kSample;

  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParameterList& out) const;
};

struct BatchNormLayer {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  real_t eps = 1e-5;
  real_t momentum = 0.9;

  Tensor forward(const Tensor& x, Mode mode);
  void collect(const std::string& prefix, ParameterList& out) const;
};

BatchNormLayer make_batch_norm(std::size_t channels, real_t eps,
                               real_t momentum);

/// Absorbs inference-mode batch-norm statistics into the preceding conv:
/// w' = w * gamma / sqrt(var + eps) per output channel and
/// b' = (b - mean) * gamma / sqrt(var + eps) + beta.
ConvLayer fold_conv_bn(const ConvLayer& conv, const BatchNormLayer& bn);

class Block {
 public:
  virtual ~Block() = default;
  virtual BlockKind kind() const = 0;
  virtual std::size_t channels() const = 0;
  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  virtual void collect(const std::string& prefix, ParameterList& out) const = 0;
};

/// Alt0/Alt1/Alt2. Layout:
///   y = x + project(attend(gate(depthwise(expand(norm1(x))))))
///   out = y + ffn_project(gate(ffn_expand(norm2(y))))
/// where gate multiplies the two channel halves and attend scales each
/// channel by a 1x1 conv of its global average.
class NafBlock final : public Block {
 public:
  NafBlock(BlockKind kind, std::size_t channels, const BlockOptions& options,
           InitScheme init, Rng& rng);

  BlockKind kind() const override { return kind_; }
  std::size_t channels() const override { return channels_; }
  Tensor forward(const Tensor& x, Mode mode) override;
  void collect(const std::string& prefix, ParameterList& out) const override;

  std::optional<LayerNormLayer> norm1;
  ConvLayer expand;
  ConvLayer depthwise;
  std::optional<ConvLayer> attention;
  ConvLayer project;
  std::optional<LayerNormLayer> norm2;
  ConvLayer ffn_expand;
  ConvLayer ffn_project;

 private:
  BlockKind kind_;
  std::size_t channels_;
};

/// Alt3: out = x + relu(bn(conv(x))).
class ConvBnReluBlock final : public Block {
 public:
  ConvBnReluBlock(std::size_t channels, const BlockOptions& options,
                  InitScheme init, Rng& rng);

  BlockKind kind() const override { return BlockKind::kAlt3; }
  std::size_t channels() const override { return channels_; }
  Tensor forward(const Tensor& x, Mode mode) override;
  void collect(const std::string& prefix, ParameterList& out) const override;

  /// Single-conv inference form: x + relu(folded_conv(x)).
  ConvLayer folded() const;
  Tensor forward_folded(const Tensor& x) const;

  ConvLayer conv;
  BatchNormLayer bn;

 private:
  std::size_t channels_;
};

std::unique_ptr<Block> make_block(BlockKind kind, std::size_t channels,
                                  const BlockOptions& options, InitScheme init,
                                  Rng& rng);

}  // namespace dnas::nn
