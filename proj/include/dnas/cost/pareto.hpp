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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dnas::cost {

struct ParetoPoint {
  double quality = 0;  // e.g. PSNR in dB; higher is better
  double cost = 0;     // e.g. GMACs; lower is better
  std::string label;
  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

/// True when `a` is at least as good as `b` in both objectives and strictly
/// better in one.
bool dominates(const ParetoPoint& a, const ParetoPoint& b);

/// Non-dominated subset sorted by cost ascending (ties: quality descending,
/// then label), so the result does not depend on input order. Exact
/// duplicates do not dominate each other and are all kept.
std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points);

/// CSV with header "label,quality,cost". Malformed rows throw
/// std::runtime_error naming the 1-based line number.
std::vector<ParetoPoint> read_points_csv(std::istream& in);
void write_points_csv(std::ostream& out, std::span<const ParetoPoint> points);

/// Whitespace-separated "cost quality label" rows with a comment header,
/// directly plottable with gnuplot.
void write_plot_data(std::ostream& out, std::span<const ParetoPoint> all,
                     std::span<const ParetoPoint> front);

}  // namespace dnas::cost
