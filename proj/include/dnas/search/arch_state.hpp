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

#include <map>
#include <string>
#include <vector>

#include "dnas/search/roster.hpp"

namespace dnas::search {

/// Architecture parameters φ of every searchable stage; the encodings are
/// α = softmax(φ / temperature).
class ArchState {
 public:
  struct Slot {
    nn::StageId stage;
    std::vector<nn::CandidateSpec> candidates;
    Tensor phi;  // [K], requires grad
  };

  ArchState() = default;
  /// φ starts at zero (uniform α) for every searchable stage.
  explicit ArchState(const RosterSet& rosters, real_t temperature = 1);

  const std::vector<Slot>& slots() const { return slots_; }
  const Slot& slot(nn::StageId stage) const;
  bool has_stage(nn::StageId stage) const;

  real_t temperature() const { return temperature_; }
  void set_temperature(real_t t);

  /// Recorded on the autodiff tape when gradients are enabled.
  Tensor alpha(nn::StageId stage) const;
  std::vector<double> alpha_values(nn::StageId stage) const;
  /// stage name -> candidate id -> α.
  std::map<std::string, std::map<std::string, double>> snapshot() const;

  std::vector<Tensor> parameters() const;

  /// Sets φ = temperature * log(α) so softmax reproduces α up to
  /// renormalization. α entries must be positive.
  void set_alpha(nn::StageId stage, const std::vector<double>& alpha);
  void set_phi(nn::StageId stage, const std::vector<double>& phi);

 private:
  Slot& mutable_slot(nn::StageId stage);

  std::vector<Slot> slots_;
  real_t temperature_ = 1;
};

}  // namespace dnas::search
