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
#include <cstdint>
#include <functional>
#include <memory>

#include "dnas/nn/blocks.hpp"

namespace dnas::nn {

/// Stages in forward order: four encoders, the middle, four decoders.
enum class StageId : std::uint8_t {
  kEnc1, kEnc2, kEnc3, kEnc4, kMid, kDec4, kDec3, kDec2, kDec1
};

inline constexpr std::size_t kNumStages = 9;
inline constexpr std::array<StageId, kNumStages> kStageOrder = {
    StageId::kEnc1, StageId::kEnc2, StageId::kEnc3, StageId::kEnc4, StageId::kMid,
    StageId::kDec4, StageId::kDec3, StageId::kDec2, StageId::kDec1};

/// Spatial size must be divisible by this (four stride-2 downsamples).
inline constexpr std::size_t kDownsamplingFactor = 16;

std::string_view stage_name(StageId id);  // "enc1", ..., "mid", ..., "dec1"
StageId parse_stage(std::string_view name);
constexpr std::size_t stage_index(StageId id) { return static_cast<std::size_t>(id); }
/// Resolution level: 0 for enc1/dec1 up to 4 for mid.
std::size_t stage_level(StageId id);

struct UNetConfig {
  std::size_t input_channels = 3;
  std::size_t width = 8;
  std::array<CandidateSpec, kNumStages> stages = base_stages();
  BlockOptions block;

  /// (2-2-4-8)-12-(2-2-2-2), all NAF blocks.
  static std::array<CandidateSpec, kNumStages> base_stages();

  CandidateSpec& stage(StageId id) { return stages[stage_index(id)]; }
  const CandidateSpec& stage(StageId id) const { return stages[stage_index(id)]; }
  std::size_t stage_channels(StageId id) const { return width << stage_level(id); }

  void validate() const;
  friend bool operator==(const UNetConfig& a, const UNetConfig& b) {
    return a.input_channels == b.input_channels && a.width == b.width &&
           a.stages == b.stages;
  }
};

/// Anything that maps a stage's features to same-shape features.
class StageModule {
 public:
  virtual ~StageModule() = default;
  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  virtual void collect(const std::string& prefix, ParameterList& out) const = 0;
};

/// `spec.count` blocks of `spec.kind` applied in sequence.
class BlockSequence final : public StageModule {
 public:
  BlockSequence(const CandidateSpec& spec, std::size_t channels,
                const BlockOptions& options, InitScheme init, Rng& rng);
  Tensor forward(const Tensor& x, Mode mode) override;
  void collect(const std::string& prefix, ParameterList& out) const override;

  const CandidateSpec& spec() const { return spec_; }
  std::vector<std::unique_ptr<Block>>& blocks() { return blocks_; }

 private:
  CandidateSpec spec_;
  std::vector<std::unique_ptr<Block>> blocks_;
};

/// Builds the module for one stage. The default factory builds a
/// BlockSequence from the config's CandidateSpec; the supernet substitutes
/// mixtures for searchable stages.
using StageFactory =
    std::function<std::unique_ptr<StageModule>(StageId, std::size_t channels, Rng&)>;

/// U-Net: 3x3 stem, encoders separated by 2x2 stride-2 convs (c -> 2c),
/// middle, decoders preceded by a 1x1 conv (c -> 2c) + pixel shuffle
/// (2c -> c/2) and an additive skip from the matching encoder, 3x3 head,
/// and a global residual from input to output.
class Network {
 public:
  Network(const UNetConfig& config, InitScheme init, Rng& rng,
          const StageFactory& factory = {});

  Tensor forward(const Tensor& x, Mode mode);

  /// Every named tensor, including batch-norm running statistics.
  ParameterList parameters() const;
  /// Tensors updated by the optimizer.
  std::vector<Tensor> trainable() const;
  /// Element count of the trainable tensors.
  std::size_t parameter_count() const;

  const UNetConfig& config() const { return config_; }
  StageModule& stage(StageId id) { return *stages_[stage_index(id)]; }

 private:
  UNetConfig config_;
  ConvLayer stem_;
  ConvLayer head_;
  std::array<ConvLayer, 4> down_;
  std::array<ConvLayer, 4> up_;
  std::array<std::unique_ptr<StageModule>, kNumStages> stages_;
};

Network build_unet(const UNetConfig& config, InitScheme init, std::uint64_t seed);

}  // namespace dnas::nn
