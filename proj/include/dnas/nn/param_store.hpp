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
#include <functional>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "dnas/nn/blocks.hpp"
#include "dnas/nn/unet.hpp"

namespace dnas::nn {

// Parameter container layout:
//   8 bytes   magic "DNASPRM1"
//   8 bytes   little-endian u64 manifest length L
//   L bytes   JSON manifest {"attributes": {...}, "tensors": [{name, shape,
//             dtype, offset, nbytes, trainable}, ...]}
//   payload   raw little-endian tensor data; offsets are relative to the
//             payload start.

struct ParamFile {
  nlohmann::json attributes = nlohmann::json::object();
  std::map<std::string, Tensor> tensors;
};

void save_params(const std::filesystem::path& path, const ParameterList& params,
                 const nlohmann::json& attributes = nlohmann::json::object());
ParamFile load_params(const std::filesystem::path& path);

/// Copies values into `dst` by name. `rename` maps a source name to the
/// destination name (or "" to skip). Every destination tensor must be
/// covered with a matching shape; returns the number copied.
std::size_t assign_params(const ParameterList& dst, const std::map<std::string, Tensor>& src,
                          const std::function<std::string(const std::string&)>& rename = {});

nlohmann::json config_to_json(const UNetConfig& config);
UNetConfig config_from_json(const nlohmann::json& j);

}  // namespace dnas::nn
