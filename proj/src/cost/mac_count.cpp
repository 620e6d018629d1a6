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

#include "dnas/cost/mac_count.hpp"

#include <charconv>

#include <fmt/format.h>

namespace dnas::cost {

namespace {

OpCost elementwise(std::size_t channels, Resolution res) {
  return {channels * res.pixels(), 0, false};
}

OpCost layer_norm_cost(std::size_t channels, Resolution res) {
  return {2 * channels * res.pixels(), 2 * channels, false};
}

}  // namespace

Resolution parse_resolution(std::string_view text) {
  const auto x = text.find('x');
  auto parse = [&](std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
      throw std::invalid_argument(fmt::format("resolution '{}' is not of the form HxW", text));
    }
    return v;
  };
  if (x == std::string_view::npos) {
    throw std::invalid_argument(fmt::format("resolution '{}' is not of the form HxW", text));
  }
  return {parse(text.substr(0, x)), parse(text.substr(x + 1))};
}

OpCost conv_cost(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                 std::size_t groups, Resolution out, bool bias) {
  const std::uint64_t per_pixel = out_channels * (in_channels / groups) * kernel * kernel;
  return {per_pixel * out.pixels(), per_pixel + (bias ? out_channels : 0), false};
}

OpCost block_cost(nn::BlockKind kind, std::size_t c, Resolution res,
                  const nn::BlockOptions& options, bool fold_alt3) {
  if (kind == nn::BlockKind::kAlt3) {
    const std::size_t k = options.alt3_kernel;
    OpCost cost = conv_cost(c, c, k, 1, res, true);
    cost.params += 2 * c;  // batch-norm gamma/beta
    if (!fold_alt3) cost += elementwise(c, res);
    cost += elementwise(c, res);  // relu
    cost += elementwise(c, res);  // residual add
    cost.foldable = true;
    return cost;
  }
  const bool norms = kind != nn::BlockKind::kAlt1;
  const bool attention = kind != nn::BlockKind::kAlt2;
  const std::size_t wide = c * options.expand_ratio;
  const std::size_t ffn = c * options.ffn_ratio;

  OpCost cost;
  if (norms) cost += layer_norm_cost(c, res);
  cost += conv_cost(c, wide, 1, 1, res, true);
  cost += conv_cost(wide, wide, 3, wide, res, true);
  cost += elementwise(wide / 2, res);  // gate
  if (attention) {
    cost += {wide / 2 * res.pixels(), 0, false};            // pooling reads
    cost += conv_cost(wide / 2, wide / 2, 1, 1, {1, 1}, true);
    cost += elementwise(wide / 2, res);                     // channel scale
  }
  cost += conv_cost(wide / 2, c, 1, 1, res, true);
  cost += elementwise(c, res);  // residual
  if (norms) cost += layer_norm_cost(c, res);
  cost += conv_cost(c, ffn, 1, 1, res, true);
  cost += elementwise(ffn / 2, res);  // gate
  cost += conv_cost(ffn / 2, c, 1, 1, res, true);
  cost += elementwise(c, res);  // residual
  return cost;
}

OpCost candidate_cost(const nn::CandidateSpec& spec, std::size_t channels, Resolution res,
                      const nn::BlockOptions& options, bool fold_alt3) {
  OpCost cost = block_cost(spec.kind, channels, res, options, fold_alt3) * spec.count;
  return cost;
}

Resolution stage_resolution(nn::StageId id, Resolution input) {
  const std::size_t level = nn::stage_level(id);
  return {input.height >> level, input.width >> level};
}

OpCost network_cost(const nn::UNetConfig& config, Resolution input, bool fold_alt3) {
  config.validate();
  if (input.height % nn::kDownsamplingFactor != 0 || input.width % nn::kDownsamplingFactor != 0) {
    throw std::invalid_argument(fmt::format("resolution {}x{} is not divisible by {}", input.height,
                                            input.width, nn::kDownsamplingFactor));
  }
  const std::size_t w = config.width;
  OpCost cost = conv_cost(config.input_channels, w, 3, 1, input, true);  // stem
  for (nn::StageId id : nn::kStageOrder) {
    cost += candidate_cost(config.stage(id), config.stage_channels(id),
                           stage_resolution(id, input), config.block, fold_alt3);
  }
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t c = w << l;
    const Resolution lo{input.height >> (l + 1), input.width >> (l + 1)};
    const Resolution hi{input.height >> l, input.width >> l};
    cost += conv_cost(c, 2 * c, 2, 1, lo, true);      // downsample
    cost += conv_cost(2 * c, 4 * c, 1, 1, lo, false);  // upsample expand
    cost += elementwise(c, hi);                        // skip add
  }
  cost += conv_cost(w, config.input_channels, 3, 1, input, true);  // head
  cost += elementwise(config.input_channels, input);               // global residual
  return cost;
}

}  // namespace dnas::cost
