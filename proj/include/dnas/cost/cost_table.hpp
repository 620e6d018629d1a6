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

#include <optional>
#include <span>
#include <vector>

#include "dnas/cost/latency_table.hpp"
#include "dnas/cost/mac_count.hpp"
#include "dnas/search/roster.hpp"

namespace dnas::cost {

struct CostEntry {
  nn::CandidateSpec spec;
  OpCost cost;
  std::optional<double> latency_ms;
  double penalty = 0;  // in (0, 1]; the stage maximum is exactly 1
};

struct StageCosts {
  nn::StageId stage;
  Resolution resolution;
  std::size_t channels = 0;
  std::vector<CostEntry> entries;  // roster order
};

struct CostTableOptions {
  Resolution resolution{256, 256};
  // Weight of MACs vs measured latency in the blend; 1 uses MACs only.
  double eta = 1.0;
  bool fold_alt3 = true;
};

class CostTable {
 public:
  CostTable() = default;
  explicit CostTable(std::vector<StageCosts> stages) : stages_(std::move(stages)) {}

  const std::vector<StageCosts>& stages() const { return stages_; }
  /// Throws naming the stage (and candidate) when absent.
  const StageCosts& stage(nn::StageId id) const;
  const CostEntry& entry(nn::StageId id, const nn::CandidateSpec& spec) const;
  /// Penalties of a stage in roster order.
  std::vector<double> penalties(nn::StageId id) const;

 private:
  std::vector<StageCosts> stages_;
};

/// ℘_i = b_i / max_j b_j with b_i = eta * macs_i / max(macs)
///   + (1 - eta) * latency_i / max(latency). `latency` may be empty when
/// eta == 1.
std::vector<double> normalize_penalties(std::span<const double> macs,
                                        std::span<const double> latency, double eta);

/// Costs every candidate of every searchable stage at that stage's width
/// and resolution. With eta < 1 every candidate needs a latency entry.
CostTable build_cost_table(const search::RosterSet& rosters, const nn::UNetConfig& net,
                           const CostTableOptions& options,
                           const LatencyTable* latency = nullptr);

}  // namespace dnas::cost
