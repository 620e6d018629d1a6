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
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "dnas/cost/cost_table.hpp"
#include "dnas/data/dataset.hpp"
#include "dnas/search/finetune.hpp"

namespace dnas::cli {

/// Schema violation in a run configuration; the message names the key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON document driving every subcommand. Every section is optional;
/// unknown keys anywhere are rejected. See docs/schema.md.
struct RunConfig {
  nn::UNetConfig network;
  search::RosterSet rosters = search::default_rosters();
  cost::CostTableOptions cost;
  std::optional<std::filesystem::path> latency_table;
  data::DatasetConfig data;
  search::TrainConfig search;
  search::FinetuneConfig finetune;
  std::vector<double> eval_sigmas{25.0};
  std::optional<std::filesystem::path> pareto_points;
  std::string output_dir = "dnas_out";

  void validate() const;
};

/// Relative paths inside the document resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace dnas::cli
