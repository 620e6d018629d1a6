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

#include "dnas/search/supernet.hpp"

#include <fmt/format.h>

namespace dnas::search {

MixedStage::MixedStage(std::shared_ptr<const ArchState> arch, nn::StageId stage,
                       std::vector<std::unique_ptr<nn::BlockSequence>> candidates)
    : arch_(std::move(arch)), stage_(stage), candidates_(std::move(candidates)) {
  if (arch_->slot(stage_).candidates.size() != candidates_.size()) {
    throw std::invalid_argument(fmt::format("stage {}: {} encodings but {} candidates",
                                            nn::stage_name(stage_), arch_->slot(stage_).candidates.size(),
                                            candidates_.size()));
  }
}

Tensor mixed_forward(std::span<nn::BlockSequence* const> candidates, const Tensor& alpha,
                     const Tensor& x, nn::Mode mode) {
  if (alpha.rank() != 1 || alpha.numel() != candidates.size()) {
    throw ShapeError(fmt::format("mixture of {} candidates got encodings of shape {}", candidates.size(),
                                 shape_to_string(alpha.shape())));
  }
  std::vector<Tensor> outs;
  outs.reserve(candidates.size());
  for (auto* c : candidates) outs.push_back(c->forward(x, mode));
  return ops::weighted_sum(outs, alpha);
}

Tensor MixedStage::forward(const Tensor& x, nn::Mode mode) {
  std::vector<nn::BlockSequence*> ptrs;
  for (auto& c : candidates_) ptrs.push_back(c.get());
  return mixed_forward(ptrs, arch_->alpha(stage_), x, mode);
}

void MixedStage::collect(const std::string& prefix, nn::ParameterList& out) const {
  for (std::size_t j = 0; j < candidates_.size(); ++j) {
    candidates_[j]->collect(fmt::format("{}.cand{}", prefix, j), out);
  }
}

Supernet::Supernet(const nn::UNetConfig& base, const RosterSet& rosters, nn::InitScheme init,
                   std::uint64_t seed, real_t temperature)
    : base_(base), rosters_(rosters), arch_(std::make_shared<ArchState>(rosters, temperature)) {
  nn::Rng rng(seed);
  auto factory = [&](nn::StageId id, std::size_t channels, nn::Rng& r) -> std::unique_ptr<nn::StageModule> {
    if (!arch_->has_stage(id)) return nullptr;
    std::vector<std::unique_ptr<nn::BlockSequence>> cands;
    for (const auto& spec : arch_->slot(id).candidates) {
      cands.push_back(std::make_unique<nn::BlockSequence>(spec, channels, base_.block, init, r));
    }
    return std::make_unique<MixedStage>(arch_, id, std::move(cands));
  };
  net_ = std::make_unique<nn::Network>(base_, init, rng, factory);
}

MixedStage& Supernet::mixed(nn::StageId stage) {
  auto* m = dynamic_cast<MixedStage*>(&net_->stage(stage));
  if (m == nullptr) {
    throw std::out_of_range(fmt::format("stage {} is not searchable", nn::stage_name(stage)));
  }
  return *m;
}

}  // namespace dnas::search
