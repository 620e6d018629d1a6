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
#include <map>
#include <optional>
#include <string>

#include "dnas/nn/unet.hpp"

namespace dnas::cost {

/// Measured per-candidate latencies. File format (JSON):
///   {"latency_ms": {"enc1:1xAlt3": 0.42, "enc1:2xAlt0": 3.1, ...}}
/// Keys are "<stage>:<candidate id>"; values are positive milliseconds.
class LatencyTable {
 public:
  static LatencyTable load(const std::filesystem::path& path);
  static LatencyTable from_json_text(const std::string& text);

  void set(nn::StageId stage, const nn::CandidateSpec& spec, double ms);
  std::optional<double> find(nn::StageId stage, const nn::CandidateSpec& spec) const;
  std::size_t size() const { return entries_.size(); }

  static std::string key(nn::StageId stage, const nn::CandidateSpec& spec);

 private:
  std::map<std::string, double> entries_;
};

}  // namespace dnas::cost
