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

#include "dnas/search/losses.hpp"

#include <cmath>

#include <fmt/format.h>

namespace dnas::search {

Tensor training_loss(const Tensor& pred, const Tensor& target) { return ops::mse_loss(pred, target); }

Tensor penalty_loss(const ArchState& arch, const cost::CostTable& costs) {
  Tensor total = Tensor::scalar(0);
  for (const auto& slot : arch.slots()) {
    std::vector<real_t> p;
    for (const auto& spec : slot.candidates) {
      try {
        p.push_back(static_cast<real_t>(costs.entry(slot.stage, spec).penalty));
      } catch (const std::out_of_range&) {
        throw std::invalid_argument(fmt::format("no penalty for stage {} candidate {}",
                                                nn::stage_name(slot.stage), spec.id()));
      }
    }
    const std::size_t k = p.size();
    const Tensor weights({k}, std::move(p));
    total = ops::add(total, ops::sum(ops::mul(arch.alpha(slot.stage), weights)));
  }
  return total;
}

Tensor entropy_loss(const ArchState& arch, bool normalized) {
  Tensor total = Tensor::scalar(0);
  for (const auto& slot : arch.slots()) {
    const std::size_t k = slot.candidates.size();
    if (k < 2) continue;
    Tensor h = ops::sum(ops::xlogx(arch.alpha(slot.stage)));
    const double scale = normalized ? -1.0 / std::log(static_cast<double>(k)) : -1.0;
    total = ops::add(total, ops::mul_scalar(h, static_cast<real_t>(scale)));
  }
  return total;
}

double encoding_entropy(std::span<const double> alpha, bool normalized) {
  double h = 0;
  for (double a : alpha) h -= a > 0 ? a * std::log(a) : 0.0;
  if (!normalized) return h;
  return alpha.size() < 2 ? 0.0 : h / std::log(static_cast<double>(alpha.size()));
}

std::vector<double> stage_entropies(const ArchState& arch) {
  std::vector<double> out;
  for (const auto& slot : arch.slots()) out.push_back(encoding_entropy(arch.alpha_values(slot.stage)));
  return out;
}

double lambda_schedule(std::size_t epoch, std::size_t epochs, double lambda_start, double lambda_end) {
  if (epoch >= epochs) {
    throw std::invalid_argument(fmt::format("epoch {} outside [0, {})", epoch, epochs));
  }
  if (lambda_start == lambda_end) return lambda_start;
  if (epochs < 2) {
    throw std::invalid_argument("an exponential lambda schedule with start != end needs at least 2 epochs");
  }
  if (!(lambda_start > 0) || !(lambda_end > 0)) {
    throw std::invalid_argument(fmt::format(
        "an exponential lambda schedule needs positive endpoints, got {} -> {}", lambda_start, lambda_end));
  }
  if (epoch == epochs - 1) return lambda_end;
  const double t = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return lambda_start * std::pow(lambda_end / lambda_start, t);
}

Tensor total_loss(const Tensor& task, const Tensor& penalty, const Tensor& entropy, double beta,
                  double lambda) {
  Tensor l = task;
  if (beta != 0) l = ops::add(l, ops::mul_scalar(penalty, static_cast<real_t>(beta)));
  if (lambda != 0) l = ops::add(l, ops::mul_scalar(entropy, static_cast<real_t>(lambda)));
  return l;
}

}  // namespace dnas::search
