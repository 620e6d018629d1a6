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

#include "dnas/cost/cost_table.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace dnas::cost {

const StageCosts& CostTable::stage(nn::StageId id) const {
  for (const auto& s : stages_) {
    if (s.stage == id) return s;
  }
  throw std::out_of_range(fmt::format("cost table has no stage {}", nn::stage_name(id)));
}

const CostEntry& CostTable::entry(nn::StageId id, const nn::CandidateSpec& spec) const {
  for (const auto& e : stage(id).entries) {
    if (e.spec == spec) return e;
  }
  throw std::out_of_range(fmt::format("cost table has no entry for stage {} candidate {}",
                                      nn::stage_name(id), spec.id()));
}

std::vector<double> CostTable::penalties(nn::StageId id) const {
  std::vector<double> out;
  for (const auto& e : stage(id).entries) out.push_back(e.penalty);
  return out;
}

std::vector<double> normalize_penalties(std::span<const double> macs,
                                        std::span<const double> latency, double eta) {
  if (!(eta >= 0 && eta <= 1)) {
    throw std::invalid_argument(fmt::format("eta must lie in [0, 1], got {}", eta));
  }
  if (macs.empty()) throw std::invalid_argument("no candidates to normalize");
  if (eta < 1 && latency.size() != macs.size()) {
    throw std::invalid_argument("latency blending needs one latency per candidate");
  }
  auto positive_max = [](std::span<const double> v, const char* what) {
    double m = 0;
    for (double x : v) {
      if (!std::isfinite(x) || x <= 0) {
        throw std::invalid_argument(fmt::format("{} values must be positive, got {}", what, x));
      }
      m = std::max(m, x);
    }
    return m;
  };
  const double max_macs = positive_max(macs, "MAC");
  const double max_lat = eta < 1 ? positive_max(latency, "latency") : 1.0;
  std::vector<double> out(macs.size());
  for (std::size_t i = 0; i < macs.size(); ++i) {
    out[i] = eta * (macs[i] / max_macs);
    if (eta < 1) out[i] += (1 - eta) * (latency[i] / max_lat);
  }
  const double top = *std::max_element(out.begin(), out.end());
  for (double& p : out) p /= top;
  return out;
}

CostTable build_cost_table(const search::RosterSet& rosters, const nn::UNetConfig& net,
                           const CostTableOptions& options, const LatencyTable* latency) {
  search::validate_rosters(rosters);
  if (options.eta < 1 && latency == nullptr) {
    throw std::invalid_argument(
        fmt::format("eta = {} blends measured latency but no latency table was given", options.eta));
  }
  std::vector<StageCosts> stages;
  for (const auto& roster : rosters) {
    if (!roster.searchable) continue;
    StageCosts sc{roster.stage, stage_resolution(roster.stage, options.resolution),
                  net.stage_channels(roster.stage), {}};
    std::vector<double> macs, lat;
    for (const auto& spec : roster.candidates) {
      CostEntry e{spec, candidate_cost(spec, sc.channels, sc.resolution, net.block, options.fold_alt3),
                  latency ? latency->find(roster.stage, spec) : std::nullopt, 0};
      if (options.eta < 1 && !e.latency_ms) {
        throw std::invalid_argument(fmt::format("latency table has no entry for {}",
                                                LatencyTable::key(roster.stage, spec)));
      }
      macs.push_back(static_cast<double>(e.cost.macs));
      if (e.latency_ms) lat.push_back(*e.latency_ms);
      sc.entries.push_back(std::move(e));
    }
    const auto p = normalize_penalties(macs, lat, options.eta);
    for (std::size_t i = 0; i < p.size(); ++i) sc.entries[i].penalty = p[i];
    stages.push_back(std::move(sc));
  }
  return CostTable(std::move(stages));
}

}  // namespace dnas::cost
