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

#include "dnas/search/derive.hpp"

#include <fmt/format.h>

namespace dnas::search {

namespace {

std::vector<double> tie_costs(nn::StageId stage, const std::vector<nn::CandidateSpec>& cands,
                              const nn::UNetConfig& base, const cost::CostTable* costs) {
  std::vector<double> out;
  for (const auto& spec : cands) {
    if (costs != nullptr) {
      out.push_back(costs->entry(stage, spec).penalty);
    } else {
      // Within a stage every candidate sees the same resolution, so any
      // resolution orders them identically.
      out.push_back(static_cast<double>(
          cost::candidate_cost(spec, base.stage_channels(stage), {256, 256}, base.block).macs));
    }
  }
  return out;
}

}  // namespace

std::size_t select_candidate(std::span<const double> alpha, std::span<const double> cost) {
  if (alpha.empty() || alpha.size() != cost.size()) {
    throw std::invalid_argument(
        fmt::format("select_candidate: {} encodings, {} costs", alpha.size(), cost.size()));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < alpha.size(); ++i) {
    if (alpha[i] > alpha[best] || (alpha[i] == alpha[best] && cost[i] < cost[best])) best = i;
  }
  return best;
}

nn::UNetConfig derive_architecture(const ArchState& arch, const nn::UNetConfig& base,
                                   const cost::CostTable* costs) {
  nn::UNetConfig out = base;
  for (const auto& slot : arch.slots()) {
    const auto alpha = arch.alpha_values(slot.stage);
    const auto c = tie_costs(slot.stage, slot.candidates, base, costs);
    out.stage(slot.stage) = slot.candidates[select_candidate(alpha, c)];
  }
  return out;
}

nn::UNetConfig derive_architecture(const Encodings& encodings, const RosterSet& rosters,
                                   const nn::UNetConfig& base, const cost::CostTable* costs) {
  validate_rosters(rosters);
  for (const auto& [stage, _] : encodings) {
    const auto id = nn::parse_stage(stage);
    if (!roster_for(rosters, id).searchable) {
      throw std::invalid_argument(fmt::format("encodings given for non-searchable stage {}", stage));
    }
  }
  nn::UNetConfig out = base;
  for (const auto& r : rosters) {
    if (!r.searchable) continue;
    const std::string name(nn::stage_name(r.stage));
    const auto it = encodings.find(name);
    if (it == encodings.end()) throw std::invalid_argument(fmt::format("no encodings for stage {}", name));
    std::vector<double> alpha;
    for (const auto& spec : r.candidates) {
      const auto a = it->second.find(spec.id());
      if (a == it->second.end()) {
        throw std::invalid_argument(fmt::format("stage {}: no encoding for candidate {}", name, spec.id()));
      }
      alpha.push_back(a->second);
    }
    for (const auto& [cand, _] : it->second) {
      if (!r.index_of(nn::CandidateSpec::parse(cand))) {
        throw std::invalid_argument(fmt::format("stage {}: candidate {} is not in the roster", name, cand));
      }
    }
    const auto c = tie_costs(r.stage, r.candidates, base, costs);
    out.stage(r.stage) = r.candidates[select_candidate(alpha, c)];
  }
  return out;
}

}  // namespace dnas::search
