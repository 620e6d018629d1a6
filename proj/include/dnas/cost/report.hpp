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

#include <nlohmann/json.hpp>

#include "dnas/cost/cost_table.hpp"
#include "dnas/cost/pareto.hpp"

namespace dnas::cost {

struct ReportInput {
  nn::UNetConfig base;
  nn::UNetConfig derived;
  Resolution resolution{256, 256};
  bool fold_alt3 = true;
  std::vector<double> penalty_trace;  // L_P per epoch
  std::vector<ParetoPoint> points;    // optional (quality, GMACs) points
};

struct ComplexitySummary {
  OpCost base;
  OpCost derived;
  double mac_ratio = 0;            // derived / base
  double param_reduction_pct = 0;  // 100 * (1 - derived / base)
};

ComplexitySummary compare_complexity(const nn::UNetConfig& base, const nn::UNetConfig& derived,
                                     Resolution resolution, bool fold_alt3 = true);

/// Cost/quality report: GMACs and parameters of base and derived nets, the
/// relative parameter change, the penalty of every selected candidate, the
/// penalty trace, and Pareto membership of the supplied points. The output
/// is a pure function of its inputs.
nlohmann::json make_report(const ReportInput& input, const CostTable& table);

/// Per-candidate CSV: stage,candidate,channels,height,width,macs,params,latency_ms,penalty.
void write_cost_table_csv(std::ostream& out, const CostTable& table);

}  // namespace dnas::cost
