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

#include "dnas/cost/report.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace dnas::cost {

namespace {

nlohmann::json describe(const nn::UNetConfig& config, const OpCost& cost) {
  nlohmann::json stages = nlohmann::json::object();
  for (nn::StageId id : nn::kStageOrder) stages[std::string(nn::stage_name(id))] = config.stage(id).id();
  return {{"width", config.width},
          {"gmacs", cost.gmacs()},
          {"macs", cost.macs},
          {"params", cost.params},
          {"stages", stages}};
}

}  // namespace

ComplexitySummary compare_complexity(const nn::UNetConfig& base, const nn::UNetConfig& derived,
                                     Resolution resolution, bool fold_alt3) {
  ComplexitySummary s;
  s.base = network_cost(base, resolution, fold_alt3);
  s.derived = network_cost(derived, resolution, fold_alt3);
  s.mac_ratio = static_cast<double>(s.derived.macs) / static_cast<double>(s.base.macs);
  s.param_reduction_pct =
      100.0 * (1.0 - static_cast<double>(s.derived.params) / static_cast<double>(s.base.params));
  return s;
}

nlohmann::json make_report(const ReportInput& input, const CostTable& table) {
  const auto summary = compare_complexity(input.base, input.derived, input.resolution, input.fold_alt3);
  nlohmann::json selected = nlohmann::json::array();
  for (const auto& stage : table.stages()) {
    const auto& spec = input.derived.stage(stage.stage);
    const auto& e = table.entry(stage.stage, spec);
    selected.push_back({{"stage", nn::stage_name(stage.stage)},
                        {"candidate", spec.id()},
                        {"penalty", e.penalty},
                        {"macs", e.cost.macs}});
  }
  nlohmann::json pareto = nlohmann::json::array();
  if (!input.points.empty()) {
    const auto front = pareto_front(input.points);
    for (const auto& p : input.points) {
      pareto.push_back({{"label", p.label},
                        {"quality", p.quality},
                        {"cost", p.cost},
                        {"on_front", std::find(front.begin(), front.end(), p) != front.end()}});
    }
  }
  return {{"resolution", fmt::format("{}x{}", input.resolution.height, input.resolution.width)},
          {"alt3_folded", input.fold_alt3},
          {"base", describe(input.base, summary.base)},
          {"derived", describe(input.derived, summary.derived)},
          {"mac_ratio", summary.mac_ratio},
          {"param_reduction_pct", summary.param_reduction_pct},
          {"selected_penalties", selected},
          {"penalty_trace", input.penalty_trace},
          {"pareto", pareto}};
}

void write_cost_table_csv(std::ostream& out, const CostTable& table) {
  out << "stage,candidate,channels,height,width,macs,params,latency_ms,penalty\n";
  for (const auto& s : table.stages()) {
    for (const auto& e : s.entries) {
      fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", nn::stage_name(s.stage), e.spec.id(), s.channels,
                 s.resolution.height, s.resolution.width, e.cost.macs, e.cost.params,
                 e.latency_ms ? fmt::format("{}", *e.latency_ms) : std::string(), e.penalty);
    }
  }
}

}  // namespace dnas::cost
