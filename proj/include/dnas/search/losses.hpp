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

#include "dnas/cost/cost_table.hpp"
#include "dnas/search/arch_state.hpp"

namespace dnas::search {

/// Mean squared error between prediction and ground truth.
Tensor training_loss(const Tensor& pred, const Tensor& target);

/// Σ_stages Σ_i α_i ℘_i. Throws naming the stage and candidate when the
/// table lacks an entry.
Tensor penalty_loss(const ArchState& arch, const cost::CostTable& costs);

/// Σ_stages H(α) with H = -Σ α log α (0 log 0 = 0). When `normalized`,
/// each stage's entropy is divided by log K (single-candidate stages
/// contribute 0), so every stage lies in [0, 1].
Tensor entropy_loss(const ArchState& arch, bool normalized = true);

/// Per-stage normalized entropies, no tape.
/// −Σ a log a (0 log 0 = 0), divided by log K when normalized and K > 1.
double encoding_entropy(std::span<const double> alpha, bool normalized = true);

/// Normalized entropy of each searchable stage, in slot order.
std::vector<double> stage_entropies(const ArchState& arch);

/// λ(e) = start * (end / start)^(e / (E - 1)); constant when start == end.
double lambda_schedule(std::size_t epoch, std::size_t epochs, double lambda_start, double lambda_end);

/// L = L_T + β L_P + λ L_ER.
Tensor total_loss(const Tensor& task, const Tensor& penalty, const Tensor& entropy, double beta,
                  double lambda);

}  // namespace dnas::search
