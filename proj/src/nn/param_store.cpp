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

#include "dnas/nn/param_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace dnas::nn {

namespace {

constexpr char kMagic[8] = {'D', 'N', 'A', 'S', 'P', 'R', 'M', '1'};
constexpr const char* kDtype = sizeof(real_t) == 8 ? "f64" : "f32";

static_assert(std::endian::native == std::endian::little,
              "parameter container assumes a little-endian host");

}  // namespace

void save_params(const std::filesystem::path& path, const ParameterList& params,
                 const nlohmann::json& attributes) {
  nlohmann::json manifest;
  manifest["attributes"] = attributes;
  manifest["tensors"] = nlohmann::json::array();
  std::set<std::string> seen;
  std::uint64_t offset = 0;
  for (const auto& p : params) {
    if (!seen.insert(p.name).second) {
      throw std::invalid_argument(fmt::format("duplicate parameter name '{}'", p.name));
    }
    const std::uint64_t nbytes = p.tensor.numel() * sizeof(real_t);
    manifest["tensors"].push_back({{"name", p.name},
                                   {"shape", p.tensor.shape()},
                                   {"dtype", kDtype},
                                   {"offset", offset},
                                   {"nbytes", nbytes},
                                   {"trainable", p.trainable}});
    offset += nbytes;
  }
  const std::string text = manifest.dump();
  const std::uint64_t len = text.size();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : params) {
    const auto d = p.tensor.data();
    out.write(reinterpret_cast<const char*>(d.data()),
              static_cast<std::streamsize>(d.size() * sizeof(real_t)));
  }
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

ParamFile load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(fmt::format("'{}' is not a parameter container", path.string()));
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error(fmt::format("'{}': truncated manifest", path.string()));
  const auto manifest = nlohmann::json::parse(text);
  const auto payload_start = in.tellg();

  ParamFile file;
  file.attributes = manifest.value("attributes", nlohmann::json::object());
  for (const auto& e : manifest.at("tensors")) {
    const auto name = e.at("name").get<std::string>();
    if (e.at("dtype").get<std::string>() != kDtype) {
      throw std::runtime_error(fmt::format("'{}': tensor '{}' has dtype {}, build uses {}",
                                           path.string(), name, e.at("dtype").get<std::string>(),
                                           kDtype));
    }
    const auto shape = e.at("shape").get<Shape>();
    const auto nbytes = e.at("nbytes").get<std::uint64_t>();
    if (nbytes != shape_numel(shape) * sizeof(real_t)) {
      throw std::runtime_error(fmt::format("'{}': tensor '{}' size mismatch", path.string(), name));
    }
    std::vector<real_t> data(shape_numel(shape));
    in.seekg(payload_start + static_cast<std::streamoff>(e.at("offset").get<std::uint64_t>()));
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(nbytes));
    if (!in) {
      throw std::runtime_error(fmt::format("'{}': truncated data for '{}'", path.string(), name));
    }
    file.tensors.emplace(name, Tensor(shape, std::move(data), e.value("trainable", true)));
  }
  return file;
}

std::size_t assign_params(const ParameterList& dst, const std::map<std::string, Tensor>& src,
                          const std::function<std::string(const std::string&)>& rename) {
  std::map<std::string, const Tensor*> by_dst;
  for (const auto& [name, t] : src) {
    const std::string target = rename ? rename(name) : name;
    if (!target.empty()) by_dst[target] = &t;
  }
  std::size_t copied = 0;
  for (const auto& p : dst) {
    const auto it = by_dst.find(p.name);
    if (it == by_dst.end()) {
      throw std::runtime_error(fmt::format("no source value for parameter '{}'", p.name));
    }
    if (it->second->shape() != p.tensor.shape()) {
      throw ShapeError(fmt::format("parameter '{}': source shape {} vs destination {}", p.name,
                                   shape_to_string(it->second->shape()),
                                   shape_to_string(p.tensor.shape())));
    }
    const auto s = it->second->data();
    Tensor t = p.tensor;
    std::copy(s.begin(), s.end(), t.mutable_data().begin());
    ++copied;
  }
  return copied;
}

nlohmann::json config_to_json(const UNetConfig& config) {
  nlohmann::json stages = nlohmann::json::object();
  for (StageId id : kStageOrder) stages[std::string(stage_name(id))] = config.stage(id).id();
  return {{"input_channels", config.input_channels},
          {"width", config.width},
          {"stages", stages},
          {"norm_axes", config.block.norm_axes == ops::NormAxes::kSample ? "sample" : "channel"},
          {"expand_ratio", config.block.expand_ratio},
          {"ffn_ratio", config.block.ffn_ratio},
          {"alt3_kernel", config.block.alt3_kernel}};
}

UNetConfig config_from_json(const nlohmann::json& j) {
  UNetConfig c;
  c.input_channels = j.at("input_channels").get<std::size_t>();
  c.width = j.at("width").get<std::size_t>();
  for (StageId id : kStageOrder) {
    c.stage(id) = CandidateSpec::parse(j.at("stages").at(std::string(stage_name(id))).get<std::string>());
  }
  const auto axes = j.value("norm_axes", std::string("sample"));
  if (axes != "sample" && axes != "channel") {
    throw std::invalid_argument(fmt::format("norm_axes must be 'sample' or 'channel', got '{}'", axes));
  }
  c.block.norm_axes = axes == "sample" ? ops::NormAxes::kSample : ops::NormAxes::kChannel;
  c.block.expand_ratio = j.value("expand_ratio", c.block.expand_ratio);
  c.block.ffn_ratio = j.value("ffn_ratio", c.block.ffn_ratio);
  c.block.alt3_kernel = j.value("alt3_kernel", c.block.alt3_kernel);
  c.validate();
  return c;
}

}  // namespace dnas::nn
