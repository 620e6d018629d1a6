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

#include "dnas/search/trainer.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "dnas/search/derive.hpp"
#include "dnas/search/losses.hpp"

namespace dnas::search {

void TrainConfig::validate() const {
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (steps_per_epoch == 0) throw std::invalid_argument("steps_per_epoch must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(lr_weights > 0) || !(lr_arch > 0)) {
    throw std::invalid_argument(fmt::format("learning rates must be positive, got {} and {}", lr_weights, lr_arch));
  }
  if (!(beta >= 0)) throw std::invalid_argument(fmt::format("beta must be non-negative, got {}", beta));
  if (!(lambda_start >= 0) || !(lambda_start <= lambda_end)) {
    throw std::invalid_argument(
        fmt::format("need 0 <= lambda_start <= lambda_end, got {} and {}", lambda_start, lambda_end));
  }
  if (lambda_start != lambda_end) (void)lambda_schedule(0, epochs, lambda_start, lambda_end);
  if (!(temperature > 0)) throw std::invalid_argument(fmt::format("temperature must be positive, got {}", temperature));
}

SearchRun train_supernet(Supernet& supernet, const BatchSource& batches, const cost::CostTable& costs,
                         const TrainConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ArchState& arch = supernet.arch();
  arch.set_temperature(static_cast<real_t>(config.temperature));

  Adam opt_w(supernet.network().trainable(), config.adam(config.lr_weights));
  Adam opt_phi(arch.parameters(), config.adam(config.lr_arch));

  SearchRun run;
  run.train = config;
  run.base = supernet.base();
  run.rosters = supernet.rosters();

  for (std::size_t e = 0; e < config.epochs; ++e) {
    const double lambda = lambda_schedule(e, config.epochs, config.lambda_start, config.lambda_end);
    EpochTrace tr{.epoch = e, .lambda = lambda};
    for (std::size_t s = 0; s < config.steps_per_epoch; ++s) {
      const data::Batch batch = batches();
      opt_w.zero_grad();
      opt_phi.zero_grad();
      const Tensor task = training_loss(supernet.forward(batch.noisy, nn::Mode::kTrain), batch.clean);
      if (!std::isfinite(task.item())) {
        throw DivergenceError(
            fmt::format("training loss became {} at epoch {} step {}", task.item(), e, s));
      }
      const Tensor pen = penalty_loss(arch, costs);
      const Tensor ent = entropy_loss(arch, config.normalized_entropy);
      const Tensor total = total_loss(task, pen, ent, config.beta, lambda);
      backward(total);
      opt_w.step();
      opt_phi.step();
      tr.task_loss += task.item();
      tr.penalty_loss += pen.item();
      tr.entropy_loss += ent.item();
      tr.total_loss += total.item();
    }
    const double n = static_cast<double>(config.steps_per_epoch);
    tr.task_loss /= n;
    tr.penalty_loss /= n;
    tr.entropy_loss /= n;
    tr.total_loss /= n;
    const auto h = stage_entropies(arch);
    double sum = 0;
    for (double v : h) sum += v;
    tr.mean_entropy = h.empty() ? 0.0 : sum / static_cast<double>(h.size());
    run.trace.push_back(tr);
    run.alpha_history.push_back(arch.snapshot());
  }
  run.derived = derive_architecture(arch, supernet.base(), &costs);
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

}  // namespace dnas::search
