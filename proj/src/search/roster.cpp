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

#include "dnas/search/roster.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace dnas::search {

using nn::BlockKind;
using nn::CandidateSpec;
using nn::StageId;

std::optional<std::size_t> StageRoster::index_of(const CandidateSpec& spec) const {
  const auto it = std::find(candidates.begin(), candidates.end(), spec);
  if (it == candidates.end()) return std::nullopt;
  return static_cast<std::size_t>(it - candidates.begin());
}

RosterSet default_rosters() {
  RosterSet out;
  for (StageId id : nn::kStageOrder) {
    StageRoster r{id, {}, id != StageId::kMid};
    if (r.searchable) {
      const std::size_t alt3_max = id == StageId::kEnc4 ? 8 : 4;
      const std::size_t naf_max = id == StageId::kEnc4 ? 8 : id == StageId::kEnc3 ? 4 : 2;
      for (std::size_t n = 1; n <= alt3_max; ++n) r.candidates.push_back({BlockKind::kAlt3, n});
      for (BlockKind k : {BlockKind::kAlt0, BlockKind::kAlt1, BlockKind::kAlt2}) {
        for (std::size_t n = 1; n <= naf_max; ++n) r.candidates.push_back({k, n});
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

RosterSet truncate_rosters(const RosterSet& rosters, std::size_t max_count) {
  RosterSet out = rosters;
  for (auto& r : out) {
    std::erase_if(r.candidates, [&](const CandidateSpec& c) { return c.count > max_count; });
  }
  return out;
}

RosterSet restrict_rosters(const RosterSet& rosters, const std::vector<StageId>& keep) {
  RosterSet out = rosters;
  for (auto& r : out) {
    if (std::find(keep.begin(), keep.end(), r.stage) == keep.end()) {
      r.searchable = false;
      r.candidates.clear();
    }
  }
  return out;
}

void validate_rosters(const RosterSet& rosters) {
  std::set<StageId> stages;
  for (const auto& r : rosters) {
    if (!stages.insert(r.stage).second) {
      throw std::invalid_argument(
          fmt::format("stage {} appears twice in the roster set", nn::stage_name(r.stage)));
    }
    if (r.searchable && r.candidates.empty()) {
      throw std::invalid_argument(
          fmt::format("searchable stage {} has no candidates", nn::stage_name(r.stage)));
    }
    std::set<std::string> ids;
    for (const auto& c : r.candidates) {
      if (c.count == 0 || !ids.insert(c.id()).second) {
        throw std::invalid_argument(fmt::format("stage {}: invalid or repeated candidate {}",
                                                nn::stage_name(r.stage), c.id()));
      }
    }
  }
}

const StageRoster& roster_for(const RosterSet& rosters, StageId id) {
  for (const auto& r : rosters) {
    if (r.stage == id) return r;
  }
  throw std::out_of_range(fmt::format("no roster for stage {}", nn::stage_name(id)));
}

}  // namespace dnas::search
