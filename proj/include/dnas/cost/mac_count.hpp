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

#include <cstdint>

#include "dnas/nn/unet.hpp"

namespace dnas::cost {

// Counting conventions:
//   conv: Cout * Cin/groups * k^2 * Hout * Wout (bias adds are free)
//   elementwise ops (add, mul, relu, gate product, batch-norm affine):
//     one per output element
//   global average pool: one per input element read
//   layer norm: two per element (statistics pass + normalize/affine pass)
//   pixel shuffle: free (pure data movement)
// `params` counts trainable elements, matching Network::parameter_count().
struct OpCost {
  std::uint64_t macs = 0;
  std::uint64_t params = 0;
  bool foldable = false;

  OpCost& operator+=(const OpCost& o) {
    macs += o.macs;
    params += o.params;
    foldable = foldable || o.foldable;
    return *this;
  }
  friend OpCost operator+(OpCost a, const OpCost& b) { return a += b; }
  friend OpCost operator*(OpCost a, std::uint64_t n) {
    a.macs *= n;
    a.params *= n;
    return a;
  }
  double gmacs() const { return static_cast<double>(macs) * 1e-9; }
};

struct Resolution {
  std::size_t height = 256;
  std::size_t width = 256;
  std::size_t pixels() const { return height * width; }
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Parses "HxW" (e.g. "256x256").
Resolution parse_resolution(std::string_view text);

OpCost conv_cost(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                 std::size_t groups, Resolution out, bool bias);

/// One block of `kind` at `channels` width. `fold_alt3` costs Alt3 as the
/// fused conv (batch-norm elementwise work removed).
OpCost block_cost(nn::BlockKind kind, std::size_t channels, Resolution res,
                  const nn::BlockOptions& options, bool fold_alt3 = true);

OpCost candidate_cost(const nn::CandidateSpec& spec, std::size_t channels, Resolution res,
                      const nn::BlockOptions& options, bool fold_alt3 = true);

/// Resolution processed by a stage for a given network input resolution.
Resolution stage_resolution(nn::StageId id, Resolution input);

/// Whole network: stem, stages, samplers, skip adds, head, global residual.
OpCost network_cost(const nn::UNetConfig& config, Resolution input, bool fold_alt3 = true);

}  // namespace dnas::cost
