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

#include "dnas/cost/latency_table.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace dnas::cost {

std::string LatencyTable::key(nn::StageId stage, const nn::CandidateSpec& spec) {
  return fmt::format("{}:{}", nn::stage_name(stage), spec.id());
}

LatencyTable LatencyTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open latency table '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json_text(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("latency table '{}': {}", path.string(), e.what()));
  }
}

LatencyTable LatencyTable::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object() || j.size() != 1 || !j.contains("latency_ms") ||
      !j.at("latency_ms").is_object()) {
    throw std::invalid_argument("expected a single top-level object {\"latency_ms\": {...}}");
  }
  LatencyTable table;
  for (const auto& [k, v] : j.at("latency_ms").items()) {
    const auto colon = k.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument(fmt::format("key '{}' is not <stage>:<candidate>", k));
    }
    if (!v.is_number()) throw std::invalid_argument(fmt::format("'{}' is not a number", k));
    table.set(nn::parse_stage(k.substr(0, colon)), nn::CandidateSpec::parse(k.substr(colon + 1)),
              v.get<double>());
  }
  return table;
}

void LatencyTable::set(nn::StageId stage, const nn::CandidateSpec& spec, double ms) {
  if (!std::isfinite(ms) || ms <= 0) {
    throw std::invalid_argument(
        fmt::format("latency for {} must be positive and finite, got {}", key(stage, spec), ms));
  }
  entries_[key(stage, spec)] = ms;
}

std::optional<double> LatencyTable::find(nn::StageId stage, const nn::CandidateSpec& spec) const {
  const auto it = entries_.find(key(stage, spec));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

}  // namespace dnas::cost
