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

#include <filesystem>

#include "dnas/tensor/tensor.hpp"

namespace dnas::data {

/// Reads any PNG as 8-bit RGB into a [3,H,W] tensor scaled to [0,1].
Tensor read_png(const std::filesystem::path& path);

/// Writes a [3,H,W] or [1,H,W] tensor (values clipped to [0,1]) as 8-bit PNG.
void write_png(const std::filesystem::path& path, const Tensor& image);

}  // namespace dnas::data
