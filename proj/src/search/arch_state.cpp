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

#include "dnas/search/arch_state.hpp"

#include <cmath>

#include <fmt/format.h>

namespace dnas::search {

ArchState::ArchState(const RosterSet& rosters, real_t temperature) {
  validate_rosters(rosters);
  set_temperature(temperature);
  for (const auto& r : rosters) {
    if (!r.searchable) continue;
    slots_.push_back({r.stage, r.candidates, Tensor::zeros({r.candidates.size()}, true)});
  }
}

const ArchState::Slot& ArchState::slot(nn::StageId stage) const {
  for (const auto& s : slots_) {
    if (s.stage == stage) return s;
  }
  throw std::out_of_range(fmt::format("stage {} is not searchable", nn::stage_name(stage)));
}

ArchState::Slot& ArchState::mutable_slot(nn::StageId stage) {
  return const_cast<Slot&>(std::as_const(*this).slot(stage));
}

bool ArchState::has_stage(nn::StageId stage) const {
  for (const auto& s : slots_) {
    if (s.stage == stage) return true;
  }
  return false;
}

void ArchState::set_temperature(real_t t) {
  if (!(t > 0) || !std::isfinite(t)) {
    throw std::invalid_argument(fmt::format("temperature must be positive, got {}", t));
  }
  temperature_ = t;
}

Tensor ArchState::alpha(nn::StageId stage) const { return ops::softmax(slot(stage).phi, temperature_); }

std::vector<double> ArchState::alpha_values(nn::StageId stage) const {
  NoGradGuard guard;
  const Tensor a = alpha(stage);
  return {a.data().begin(), a.data().end()};
}

std::map<std::string, std::map<std::string, double>> ArchState::snapshot() const {
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& s : slots_) {
    const auto a = alpha_values(s.stage);
    auto& m = out[std::string(nn::stage_name(s.stage))];
    for (std::size_t i = 0; i < a.size(); ++i) m[s.candidates[i].id()] = a[i];
  }
  return out;
}

std::vector<Tensor> ArchState::parameters() const {
  std::vector<Tensor> out;
  for (const auto& s : slots_) out.push_back(s.phi);
  return out;
}

void ArchState::set_alpha(nn::StageId stage, const std::vector<double>& alpha) {
  std::vector<double> phi(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0)) {
      throw std::invalid_argument(
          fmt::format("stage {}: encoding {} must be positive to take its log", nn::stage_name(stage), alpha[i]));
    }
    phi[i] = temperature_ * std::log(alpha[i]);
  }
  set_phi(stage, phi);
}

void ArchState::set_phi(nn::StageId stage, const std::vector<double>& phi) {
  Slot& s = mutable_slot(stage);
  if (phi.size() != s.candidates.size()) {
    throw std::invalid_argument(fmt::format("stage {} has {} candidates, got {} values", nn::stage_name(stage),
                                            s.candidates.size(), phi.size()));
  }
  auto d = s.phi.mutable_data();
  for (std::size_t i = 0; i < phi.size(); ++i) d[i] = static_cast<real_t>(phi[i]);
}

}  // namespace dnas::search
