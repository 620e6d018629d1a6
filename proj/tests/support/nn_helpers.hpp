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

#include <random>

#include "dnas/nn/blocks.hpp"

namespace dnas::testing {

/// Overwrites every tensor in `params` with U(lo, hi); running variances
/// (and anything else named *var) are drawn from U(0.5, 1.5).
inline void randomize(const nn::ParameterList& params, std::mt19937_64& rng,
                      double lo = -0.5, double hi = 0.5) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::uniform_real_distribution<double> positive(0.5, 1.5);
  for (const auto& p : params) {
    Tensor t = p.tensor;
    const bool is_var = p.name.ends_with("running_var");
    for (auto& v : t.mutable_data()) v = static_cast<real_t>(is_var ? positive(rng) : dist(rng));
  }
}

inline nn::ParameterList params_of(const nn::Block& b) {
  nn::ParameterList out;
  b.collect("b", out);
  return out;
}

}  // namespace dnas::testing
