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
#include <iosfwd>
#include <optional>
#include <string>

#include "dnas/cli/config.hpp"

namespace dnas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad flags or config
inline constexpr int kExitRuntime = 2;  // anything failing after validation

/// Flags shared by the subcommands; unset optionals fall back to the config
/// or to files in the output directory.
struct CommandOptions {
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> latency_table;
  std::optional<std::string> resolution;
  std::optional<std::filesystem::path> run;
  std::optional<std::filesystem::path> encodings;
  std::optional<std::filesystem::path> supernet;
  std::optional<std::filesystem::path> derived;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> points;
};

/// Output directory: --output if given, else config.output_dir resolved
/// against $DNAS_OUTPUT_ROOT (or the working directory when unset).
std::filesystem::path output_directory(const RunConfig& config, const CommandOptions& options);

// Each command writes its result files into `out_dir` and a human summary
// to `log`.
void cmd_costs(const RunConfig& config, const CommandOptions& options, const std::filesystem::path& out_dir,
               std::ostream& log);
void cmd_search(const RunConfig& config, const CommandOptions& options, const std::filesystem::path& out_dir,
                std::ostream& log);
void cmd_derive(const RunConfig& config, const CommandOptions& options, const std::filesystem::path& out_dir,
                std::ostream& log);
void cmd_finetune(const RunConfig& config, const CommandOptions& options, const std::filesystem::path& out_dir,
                  std::ostream& log);
void cmd_eval(const RunConfig& config, const CommandOptions& options, const std::filesystem::path& out_dir,
              std::ostream& log);
void cmd_pareto(const RunConfig& config, const CommandOptions& options, const std::filesystem::path& out_dir,
                std::ostream& log);

/// Parses argv, runs one subcommand and returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dnas::cli
