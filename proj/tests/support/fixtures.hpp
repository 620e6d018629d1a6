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
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "dnas/nn/unet.hpp"

namespace dnas::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(DNAS_FIXTURE_DIR) / name;
}

/// stage name -> candidate id -> encoding, from reference_encodings.json.
inline std::map<std::string, std::map<std::string, double>> reference_encodings() {
  std::ifstream in(fixture_path("reference_encodings.json"));
  return nlohmann::json::parse(in).at("encodings").get<std::map<std::string, std::map<std::string, double>>>();
}

/// The highlighted (highest-encoding) configuration of the reference search,
/// written out by hand, applied to `base` (middle stage unchanged).
inline nn::UNetConfig reference_derived_config(nn::UNetConfig base) {
  using nn::BlockKind;
  using nn::StageId;
  base.stage(StageId::kEnc1) = {BlockKind::kAlt0, 2};
  base.stage(StageId::kEnc2) = {BlockKind::kAlt3, 1};
  base.stage(StageId::kEnc3) = {BlockKind::kAlt3, 2};
  base.stage(StageId::kEnc4) = {BlockKind::kAlt2, 6};
  base.stage(StageId::kDec4) = {BlockKind::kAlt3, 1};
  base.stage(StageId::kDec3) = {BlockKind::kAlt3, 2};
  base.stage(StageId::kDec2) = {BlockKind::kAlt3, 2};
  base.stage(StageId::kDec1) = {BlockKind::kAlt0, 1};
  return base;
}

}  // namespace dnas::testing
