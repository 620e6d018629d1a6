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

#include <functional>
#include <map>
#include <stdexcept>

#include "dnas/cost/cost_table.hpp"
#include "dnas/data/dataset.hpp"
#include "dnas/search/optimizer.hpp"
#include "dnas/search/supernet.hpp"

namespace dnas::search {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t steps_per_epoch = 20;
  std::size_t batch_size = 4;
  double lr_weights = 1e-3;
  double lr_arch = 3e-2;
  double beta = 0.1;
  double lambda_start = 0.01;
  double lambda_end = 1.0;
  double temperature = 1.0;
  bool normalized_entropy = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  AdamOptions adam(double lr) const { return {lr, adam_beta1, adam_beta2, adam_eps}; }
};

/// Epoch means over the steps of that epoch.
struct EpochTrace {
  std::size_t epoch = 0;
  double lambda = 0;
  double task_loss = 0;
  double penalty_loss = 0;
  double entropy_loss = 0;
  double total_loss = 0;
  double mean_entropy = 0;  // mean normalized per-stage entropy at epoch end
};

using AlphaSnapshot = std::map<std::string, std::map<std::string, double>>;

struct SearchRun {
  TrainConfig train;
  nn::UNetConfig base;
  RosterSet rosters;
  std::vector<EpochTrace> trace;
  std::vector<AlphaSnapshot> alpha_history;  // one per epoch, after its last step
  nn::UNetConfig derived;
  double wall_seconds = 0;  // kept out of the deterministic run document
};

/// L_T became NaN or infinite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using BatchSource = std::function<data::Batch()>;

/// Joint single-level optimization of candidate weights and φ: every step
/// minimizes L_T + β·L_P + λ(e)·L_ER on one batch with separate Adam groups.
SearchRun train_supernet(Supernet& supernet, const BatchSource& batches,
                         const cost::CostTable& costs, const TrainConfig& config);

}  // namespace dnas::search
