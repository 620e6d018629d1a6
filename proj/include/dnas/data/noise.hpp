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

#include "dnas/tensor/tensor.hpp"

namespace dnas::data {

/// i.i.d. N(0, (sigma_255 / 255)^2) samples, deterministic in `seed`.
Tensor gaussian_noise(const Shape& shape, double sigma_255, std::uint64_t seed);

/// clip(clean + gaussian_noise(...), 0, 1). sigma is on the 0-255 scale.
Tensor add_gaussian_noise(const Tensor& clean, double sigma_255, std::uint64_t seed);

}  // namespace dnas::data
