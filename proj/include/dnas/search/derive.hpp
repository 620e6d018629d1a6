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

#include <map>
#include <string>

#include "dnas/cost/cost_table.hpp"
#include "dnas/search/arch_state.hpp"

namespace dnas::search {

using Encodings = std::map<std::string, std::map<std::string, double>>;

/// Index of the largest encoding. Exact ties go to the lower cost, then the
/// lower roster index.
std::size_t select_candidate(std::span<const double> alpha, std::span<const double> cost);

/// Replaces every searchable stage of `base` with its highest-encoding
/// candidate. Costs for tie-breaking come from `costs` when given, otherwise
/// from the analytic MAC count at the stage's width.
nn::UNetConfig derive_architecture(const ArchState& arch, const nn::UNetConfig& base,
                                   const cost::CostTable* costs = nullptr);

/// Same, from stage name -> candidate id -> α (e.g. a run's last snapshot).
/// Every searchable stage and every roster candidate must be present.
nn::UNetConfig derive_architecture(const Encodings& encodings, const RosterSet& rosters,
                                   const nn::UNetConfig& base, const cost::CostTable* costs = nullptr);

}  // namespace dnas::search
