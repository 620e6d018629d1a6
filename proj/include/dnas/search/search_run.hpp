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

#include <filesystem>

#include <nlohmann/json.hpp>

#include "dnas/search/trainer.hpp"

namespace dnas::search {

nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json rosters_to_json(const RosterSet& rosters);
RosterSet rosters_from_json(const nlohmann::json& j);

/// Everything but wall-clock time; see docs/schema.md.
nlohmann::json run_to_json(const SearchRun& run);
SearchRun run_from_json(const nlohmann::json& j);

void save_run(const std::filesystem::path& path, const SearchRun& run);
SearchRun load_run(const std::filesystem::path& path);

/// Header: epoch,stage,candidate,alpha
void write_alpha_history_csv(const std::filesystem::path& path, const SearchRun& run);
/// Header: epoch,lambda,task_loss,penalty_loss,entropy_loss,total_loss,mean_entropy
void write_trace_csv(const std::filesystem::path& path, const SearchRun& run);

}  // namespace dnas::search
