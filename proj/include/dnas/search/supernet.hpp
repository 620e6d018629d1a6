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

#include <memory>

#include "dnas/search/arch_state.hpp"

namespace dnas::search {

/// Σ_i α_i f_i(x) over one stage's candidates, each with its own weights.
class MixedStage final : public nn::StageModule {
 public:
  MixedStage(std::shared_ptr<const ArchState> arch, nn::StageId stage,
             std::vector<std::unique_ptr<nn::BlockSequence>> candidates);

  Tensor forward(const Tensor& x, nn::Mode mode) override;
  /// Candidate j's tensors are named "<prefix>.cand<j>.<block>.<layer>...".
  void collect(const std::string& prefix, nn::ParameterList& out) const override;

  std::size_t size() const { return candidates_.size(); }
  nn::BlockSequence& candidate(std::size_t j) { return *candidates_.at(j); }

 private:
  std::shared_ptr<const ArchState> arch_;
  nn::StageId stage_;
  std::vector<std::unique_ptr<nn::BlockSequence>> candidates_;
};

/// Output of the whole mixture for explicit α values (no φ involved).
Tensor mixed_forward(std::span<nn::BlockSequence* const> candidates, const Tensor& alpha,
                     const Tensor& x, nn::Mode mode);

/// U-Net whose searchable stages are MixedStages over the roster; the
/// remaining stages follow `base`.
class Supernet {
 public:
  Supernet(const nn::UNetConfig& base, const RosterSet& rosters, nn::InitScheme init,
           std::uint64_t seed, real_t temperature = 1);

  Tensor forward(const Tensor& x, nn::Mode mode) { return net_->forward(x, mode); }

  ArchState& arch() { return *arch_; }
  const ArchState& arch() const { return *arch_; }
  nn::Network& network() { return *net_; }
  const nn::Network& network() const { return *net_; }
  const RosterSet& rosters() const { return rosters_; }
  const nn::UNetConfig& base() const { return base_; }
  MixedStage& mixed(nn::StageId stage);

 private:
  nn::UNetConfig base_;
  RosterSet rosters_;
  std::shared_ptr<ArchState> arch_;
  std::unique_ptr<nn::Network> net_;
};

}  // namespace dnas::search
