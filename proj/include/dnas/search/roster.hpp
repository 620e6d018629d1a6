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
#include <vector>

#include "dnas/nn/unet.hpp"

namespace dnas::search {

/// Candidate list of one stage. Non-searchable stages keep the base
/// network's block sequence and carry no candidates.
struct StageRoster {
  nn::StageId stage = nn::StageId::kEnc1;
  std::vector<nn::CandidateSpec> candidates;
  bool searchable = true;

  std::size_t size() const { return candidates.size(); }
  std::optional<std::size_t> index_of(const nn::CandidateSpec& spec) const;
};

using RosterSet = std::vector<StageRoster>;

/// Default search space, one roster per stage in forward order. Candidate
/// order per stage: Alt3 by count, then Alt0, Alt1, Alt2 by count.
/// Alt3 counts run 1..4 (1..8 in enc4); the NAF kinds run 1..2, except enc3
/// (1..4) and enc4 (1..8). The middle stage is not searchable.
RosterSet default_rosters();

/// Drops every candidate whose count exceeds `max_count`.
RosterSet truncate_rosters(const RosterSet& rosters, std::size_t max_count);

/// Rosters restricted to the given stages; every other stage becomes
/// non-searchable.
RosterSet restrict_rosters(const RosterSet& rosters, const std::vector<nn::StageId>& keep);

/// Throws if a searchable stage is empty, a stage repeats, or a candidate
/// repeats within a stage.
void validate_rosters(const RosterSet& rosters);

const StageRoster& roster_for(const RosterSet& rosters, nn::StageId id);

}  // namespace dnas::search
