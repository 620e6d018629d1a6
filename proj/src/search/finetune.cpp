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

#include "dnas/search/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dnas/data/metrics.hpp"
#include "dnas/nn/param_store.hpp"
#include "dnas/search/losses.hpp"

namespace dnas::search {

std::string inherited_name(const std::string& name, const Supernet& supernet, const nn::UNetConfig& derived) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) return name;
  const std::string stage = name.substr(0, dot);
  const std::string rest = name.substr(dot + 1);
  if (rest.rfind("cand", 0) != 0) return name;
  const auto id = nn::parse_stage(stage);
  const auto& roster = roster_for(supernet.rosters(), id);
  const auto j = roster.index_of(derived.stage(id));
  if (!j) {
    throw std::invalid_argument(
        fmt::format("stage {}: {} is not in the searched roster", stage, derived.stage(id).id()));
  }
  const std::string prefix = fmt::format("cand{}.", *j);
  if (rest.rfind(prefix, 0) != 0) return "";
  return stage + "." + rest.substr(prefix.size());
}

nn::Network inherit_network(const Supernet& supernet, const nn::UNetConfig& derived) {
  for (const auto& r : supernet.rosters()) {
    if (!r.searchable && !(derived.stage(r.stage) == supernet.base().stage(r.stage))) {
      throw std::invalid_argument(
          fmt::format("stage {} is not searchable but differs from the base", nn::stage_name(r.stage)));
    }
  }
  nn::Rng rng(0);  // every tensor is overwritten below
  nn::Network net(derived, nn::InitScheme::kTraining, rng);
  std::map<std::string, Tensor> src;
  for (const auto& p : supernet.network().parameters()) src.emplace(p.name, p.tensor);
  nn::assign_params(net.parameters(), src,
                    [&](const std::string& n) { return inherited_name(n, supernet, derived); });
  return net;
}

void FinetuneConfig::validate() const {
  if (epochs == 0 || steps_per_epoch == 0 || batch_size == 0) {
    throw std::invalid_argument("fine-tuning epochs, steps_per_epoch and batch_size must be positive");
  }
  if (!(lr > 0)) throw std::invalid_argument(fmt::format("fine-tuning lr must be positive, got {}", lr));
}

std::vector<double> finetune(nn::Network& net, const BatchSource& batches, const FinetuneConfig& config) {
  config.validate();
  Adam opt(net.trainable(), {config.lr, config.adam_beta1, config.adam_beta2, config.adam_eps});
  std::vector<double> trace;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    double sum = 0;
    for (std::size_t s = 0; s < config.steps_per_epoch; ++s) {
      const data::Batch batch = batches();
      opt.zero_grad();
      const Tensor loss = training_loss(net.forward(batch.noisy, nn::Mode::kTrain), batch.clean);
      if (!std::isfinite(loss.item())) {
        throw DivergenceError(fmt::format("fine-tuning loss became {} at epoch {} step {}", loss.item(), e, s));
      }
      backward(loss);
      opt.step();
      sum += loss.item();
    }
    trace.push_back(sum / static_cast<double>(config.steps_per_epoch));
  }
  return trace;
}

EvalSummary evaluate(nn::Network& net, const std::vector<data::ImagePair>& pairs) {
  NoGradGuard guard;
  EvalSummary out;
  for (const auto& pair : pairs) {
    const Tensor pred = net.forward(data::stack({pair.noisy}), nn::Mode::kEval);
    std::vector<real_t> v(pred.data().begin(), pred.data().end());
    for (auto& x : v) x = std::clamp<real_t>(x, 0, 1);
    const Tensor restored(pair.clean.shape(), std::move(v));
    EvalRow row{.image = pair.image,
                .sigma = pair.sigma,
                .psnr = data::psnr(restored, pair.clean),
                .ssim = data::ssim(restored, pair.clean),
                .noisy_psnr = data::psnr(pair.noisy, pair.clean),
                .noisy_ssim = data::ssim(pair.noisy, pair.clean)};
    out.mean_psnr += row.psnr;
    out.mean_ssim += row.ssim;
    out.mean_noisy_psnr += row.noisy_psnr;
    out.mean_noisy_ssim += row.noisy_ssim;
    out.rows.push_back(row);
  }
  if (!pairs.empty()) {
    const double n = static_cast<double>(pairs.size());
    out.mean_psnr /= n;
    out.mean_ssim /= n;
    out.mean_noisy_psnr /= n;
    out.mean_noisy_ssim /= n;
  }
  return out;
}

}  // namespace dnas::search
