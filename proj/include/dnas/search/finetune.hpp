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

#include "dnas/search/trainer.hpp"

namespace dnas::search {

/// Maps a supernet tensor name to its name in the discrete network built
/// from `derived`: the selected candidate "<stage>.cand<j>.<rest>" becomes
/// "<stage>.<rest>", other candidates map to "" (dropped), shared layers keep
/// their name.
std::string inherited_name(const std::string& name, const Supernet& supernet,
                           const nn::UNetConfig& derived);

/// Discrete network for `derived` whose every tensor (batch-norm statistics
/// included) is copied from the matching supernet candidate.
nn::Network inherit_network(const Supernet& supernet, const nn::UNetConfig& derived);

struct FinetuneConfig {
  std::size_t epochs = 10;
  std::size_t steps_per_epoch = 20;
  std::size_t batch_size = 4;
  double lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Trains with L_T only; returns the per-epoch mean training loss.
std::vector<double> finetune(nn::Network& net, const BatchSource& batches, const FinetuneConfig& config);

struct EvalRow {
  std::size_t image = 0;
  double sigma = 0;
  double psnr = 0;
  double ssim = 0;
  double noisy_psnr = 0;
  double noisy_ssim = 0;
};

struct EvalSummary {
  std::vector<EvalRow> rows;
  double mean_psnr = 0;
  double mean_ssim = 0;
  double mean_noisy_psnr = 0;
  double mean_noisy_ssim = 0;
};

/// Inference-mode metrics on each pair; outputs are clipped to [0, 1].
EvalSummary evaluate(nn::Network& net, const std::vector<data::ImagePair>& pairs);

}  // namespace dnas::search
