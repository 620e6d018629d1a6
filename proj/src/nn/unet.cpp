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

#include "dnas/nn/unet.hpp"

#include <fmt/format.h>

namespace dnas::nn {

namespace {

constexpr std::array<std::string_view, kNumStages> kStageNames = {
    "enc1", "enc2", "enc3", "enc4", "mid", "dec4", "dec3", "dec2", "dec1"};

StageId encoder(std::size_t level) { return kStageOrder[level]; }
StageId decoder(std::size_t level) { return kStageOrder[kNumStages - 1 - level]; }

}  // namespace

std::string_view stage_name(StageId id) { return kStageNames[stage_index(id)]; }

StageId parse_stage(std::string_view name) {
  for (StageId id : kStageOrder) {
    if (stage_name(id) == name) return id;
  }
  throw std::invalid_argument(fmt::format("unknown stage '{}'", name));
}

std::size_t stage_level(StageId id) {
  const std::size_t i = stage_index(id);
  return i <= 4 ? i : kNumStages - 1 - i;
}

std::array<CandidateSpec, kNumStages> UNetConfig::base_stages() {
  constexpr std::array<std::size_t, kNumStages> counts = {2, 2, 4, 8, 12, 2, 2, 2, 2};
  std::array<CandidateSpec, kNumStages> out;
  for (std::size_t i = 0; i < kNumStages; ++i) out[i] = {BlockKind::kAlt0, counts[i]};
  return out;
}

void UNetConfig::validate() const {
  if (input_channels == 0) throw std::invalid_argument("input_channels must be positive");
  if (width == 0) throw std::invalid_argument("width must be positive");
  if ((width * block.expand_ratio) % 2 != 0 || (width * block.ffn_ratio) % 2 != 0) {
    throw std::invalid_argument(fmt::format(
        "width {} with expansion ratios {}/{} gives an odd channel count at a "
        "simple gate split",
        width, block.expand_ratio, block.ffn_ratio));
  }
  if (block.alt3_kernel % 2 == 0) {
    throw std::invalid_argument("alt3_kernel must be odd");
  }
  for (StageId id : kStageOrder) {
    if (stage(id).count == 0) {
      throw std::invalid_argument(fmt::format("stage {} has zero blocks", stage_name(id)));
    }
  }
}

BlockSequence::BlockSequence(const CandidateSpec& spec, std::size_t channels,
                             const BlockOptions& options, InitScheme init, Rng& rng)
    : spec_(spec) {
  for (std::size_t i = 0; i < spec.count; ++i) {
    blocks_.push_back(make_block(spec.kind, channels, options, init, rng));
  }
}

Tensor BlockSequence::forward(const Tensor& x, Mode mode) {
  Tensor y = x;
  for (auto& b : blocks_) y = b->forward(y, mode);
  return y;
}

void BlockSequence::collect(const std::string& prefix, ParameterList& out) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i]->collect(fmt::format("{}.{}", prefix, i), out);
  }
}

Network::Network(const UNetConfig& config, InitScheme init, Rng& rng,
                 const StageFactory& factory)
    : config_(config) {
  config_.validate();
  const std::size_t w = config_.width;
  auto make_stage = [&](StageId id) -> std::unique_ptr<StageModule> {
    const std::size_t c = config_.stage_channels(id);
    if (factory) {
      if (auto m = factory(id, c, rng)) return m;
    }
    return std::make_unique<BlockSequence>(config_.stage(id), c, config_.block, init, rng);
  };

  // Construction follows forward order so the RNG stream maps stably onto
  // layers.
  stem_ = make_conv(config_.input_channels, w, 3, {.padding = 1}, true, rng);
  for (std::size_t l = 0; l < 4; ++l) {
    const StageId id = encoder(l);
    stages_[stage_index(id)] = make_stage(id);
    const std::size_t c = w << l;
    down_[l] = make_conv(c, 2 * c, 2, {.stride = 2}, true, rng);
  }
  stages_[stage_index(StageId::kMid)] = make_stage(StageId::kMid);
  for (std::size_t l = 4; l-- > 0;) {
    const std::size_t c = w << (l + 1);
    up_[l] = make_conv(c, 2 * c, 1, {}, false, rng);
    const StageId id = decoder(l);
    stages_[stage_index(id)] = make_stage(id);
  }
  head_ = make_conv(w, config_.input_channels, 3, {.padding = 1}, true, rng, true);
}

Tensor Network::forward(const Tensor& x, Mode mode) {
  if (x.rank() != 4 || x.dim(1) != config_.input_channels) {
    throw ShapeError(fmt::format("network expects [N, {}, H, W] input, got {}",
                                 config_.input_channels, shape_to_string(x.shape())));
  }
  if (x.dim(2) % kDownsamplingFactor != 0 || x.dim(3) % kDownsamplingFactor != 0) {
    throw ShapeError(fmt::format("input spatial size {}x{} is not divisible by {}",
                                 x.dim(2), x.dim(3), kDownsamplingFactor));
  }
  Tensor f = stem_.forward(x);
  std::array<Tensor, 4> skips;
  for (std::size_t l = 0; l < 4; ++l) {
    f = stages_[stage_index(encoder(l))]->forward(f, mode);
    skips[l] = f;
    f = down_[l].forward(f);
  }
  f = stages_[stage_index(StageId::kMid)]->forward(f, mode);
  for (std::size_t l = 4; l-- > 0;) {
    f = ops::pixel_shuffle(up_[l].forward(f), 2);
    f = ops::add(f, skips[l]);
    f = stages_[stage_index(decoder(l))]->forward(f, mode);
  }
  return ops::add(head_.forward(f), x);
}

ParameterList Network::parameters() const {
  ParameterList out;
  stem_.collect("stem", out);
  for (std::size_t l = 0; l < 4; ++l) {
    const StageId id = encoder(l);
    stages_[stage_index(id)]->collect(std::string(stage_name(id)), out);
    down_[l].collect(fmt::format("down{}", l + 1), out);
  }
  stages_[stage_index(StageId::kMid)]->collect("mid", out);
  for (std::size_t l = 4; l-- > 0;) {
    up_[l].collect(fmt::format("up{}", l + 1), out);
    const StageId id = decoder(l);
    stages_[stage_index(id)]->collect(std::string(stage_name(id)), out);
  }
  head_.collect("head", out);
  return out;
}

std::vector<Tensor> Network::trainable() const {
  std::vector<Tensor> out;
  for (auto& p : parameters()) {
    if (p.trainable) out.push_back(p.tensor);
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (auto& t : trainable()) n += t.numel();
  return n;
}

Network build_unet(const UNetConfig& config, InitScheme init, std::uint64_t seed) {
  Rng rng(seed);
  return Network(config, init, rng);
}

}  // namespace dnas::nn
