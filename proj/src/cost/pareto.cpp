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

#include "dnas/cost/pareto.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace dnas::cost {

namespace {

bool front_order(const ParetoPoint& a, const ParetoPoint& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.quality != b.quality) return a.quality > b.quality;
  return a.label < b.label;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
  return a.quality >= b.quality && a.cost <= b.cost && (a.quality > b.quality || a.cost < b.cost);
}

std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points) {
  if (points.empty()) throw std::invalid_argument("pareto_front needs at least one point");
  for (const auto& p : points) {
    if (!std::isfinite(p.quality) || !std::isfinite(p.cost)) {
      throw std::invalid_argument(fmt::format("point '{}' has a non-finite coordinate", p.label));
    }
  }
  std::vector<ParetoPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), front_order);

  // Sweep groups of equal cost in ascending order. A group's best-quality
  // points survive iff they beat everything cheaper.
  std::vector<ParetoPoint> front;
  double best = -INFINITY;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].cost == sorted[i].cost) ++j;
    const double group_best = sorted[i].quality;
    if (group_best > best) {
      for (std::size_t k = i; k < j && sorted[k].quality == group_best; ++k) {
        front.push_back(sorted[k]);
      }
      best = group_best;
    }
    i = j;
  }
  return front;
}

std::vector<ParetoPoint> read_points_csv(std::istream& in) {
  std::vector<ParetoPoint> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  auto fail = [&](std::string_view why) {
    throw std::runtime_error(fmt::format("points CSV line {}: {}", lineno, why));
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = row.find(',', start);
      fields.push_back(trim(row.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (header) {
      header = false;
      if (fields.size() != 3 || fields[0] != "label" || fields[1] != "quality" ||
          fields[2] != "cost") {
        fail("expected header 'label,quality,cost'");
      }
      continue;
    }
    if (fields.size() != 3) fail(fmt::format("expected 3 fields, found {}", fields.size()));
    if (fields[0].empty()) fail("empty label");
    ParetoPoint p{0, 0, std::string(fields[0])};
    for (auto [text, dst] : {std::pair{fields[1], &p.quality}, std::pair{fields[2], &p.cost}}) {
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), *dst);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(*dst)) {
        fail(fmt::format("'{}' is not a finite number", text));
      }
    }
    out.push_back(std::move(p));
  }
  if (header) throw std::runtime_error("points CSV is empty");
  return out;
}

void write_points_csv(std::ostream& out, std::span<const ParetoPoint> points) {
  out << "label,quality,cost\n";
  for (const auto& p : points) fmt::print(out, "{},{},{}\n", p.label, p.quality, p.cost);
}

void write_plot_data(std::ostream& out, std::span<const ParetoPoint> all,
                     std::span<const ParetoPoint> front) {
  out << "# cost quality on_front label\n";
  for (const auto& p : all) {
    const bool on = std::find(front.begin(), front.end(), p) != front.end();
    fmt::print(out, "{} {} {} \"{}\"\n", p.cost, p.quality, on ? 1 : 0, p.label);
  }
}

}  // namespace dnas::cost
