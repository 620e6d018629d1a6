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

#include "dnas/cli/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace dnas::cli {

using nlohmann::json;

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ConfigError(fmt::format("'{}' must be an object", path.empty() ? "<root>" : path));
  }
  return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  require_object(j, path);
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(fmt::format("unknown key '{}' (allowed: {})", join_path(path, key),
                                    fmt::join(allowed, ", ")));
    }
  }
}

class Section {
 public:
  Section(const json& j, std::string path, const std::set<std::string>& allowed) : j_(j), path_(std::move(path)) {
    check_keys(j_, allowed, path_);
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const std::string& key) const { return j_.at(key); }
  std::string path(const std::string& key) const { return join_path(path_, key); }

  void get(const std::string& key, std::size_t& out) const {
    if (!has(key)) return;
    if (!at(key).is_number_unsigned()) throw type(key, "a non-negative integer");
    out = at(key).get<std::size_t>();
  }
  void get(const std::string& key, std::uint64_t& out, int) const {
    if (!has(key)) return;
    if (!at(key).is_number_unsigned()) throw type(key, "a non-negative integer");
    out = at(key).get<std::uint64_t>();
  }
  void get(const std::string& key, double& out) const {
    if (!has(key)) return;
    if (!at(key).is_number()) throw type(key, "a number");
    out = at(key).get<double>();
  }
  void get(const std::string& key, bool& out) const {
    if (!has(key)) return;
    if (!at(key).is_boolean()) throw type(key, "true or false");
    out = at(key).get<bool>();
  }
  void get(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    if (!at(key).is_string()) throw type(key, "a string");
    out = at(key).get<std::string>();
  }
  void get(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    if (!at(key).is_array()) throw type(key, "an array of numbers");
    out.clear();
    for (const auto& v : at(key)) {
      if (!v.is_number()) throw type(key, "an array of numbers");
      out.push_back(v.get<double>());
    }
  }

  ConfigError type(const std::string& key, const char* what) const {
    return ConfigError(fmt::format("'{}' must be {}", path(key), what));
  }

 private:
  const json& j_;
  std::string path_;
};

template <typename F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("'{}': {}", path, e.what()));
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void parse_network(const json& j, nn::UNetConfig& net) {
  const Section s(j, "network", {"input_channels", "width", "stages", "block"});
  s.get("input_channels", net.input_channels);
  s.get("width", net.width);
  if (s.has("stages")) {
    const auto& st = require_object(s.at("stages"), "network.stages");
    for (const auto& [name, spec] : st.items()) {
      const std::string path = "network.stages." + name;
      const auto id = wrap(path, [&] { return nn::parse_stage(name); });
      if (!spec.is_string()) throw ConfigError(fmt::format("'{}' must be a string such as \"2xAlt0\"", path));
      net.stage(id) = wrap(path, [&] { return nn::CandidateSpec::parse(spec.get<std::string>()); });
    }
  }
  if (s.has("block")) {
    const Section b(s.at("block"), "network.block",
                    {"norm_axes", "norm_eps", "bn_eps", "bn_momentum", "expand_ratio", "ffn_ratio", "alt3_kernel"});
    std::string axes = net.block.norm_axes == ops::NormAxes::kSample ? "sample" : "channel";
    b.get("norm_axes", axes);
    if (axes == "sample") {
      net.block.norm_axes = ops::NormAxes::kSample;
    } else if (axes == "channel") {
      net.block.norm_axes = ops::NormAxes::kChannel;
    } else {
      throw ConfigError(fmt::format("'network.block.norm_axes' must be \"sample\" or \"channel\", got \"{}\"", axes));
    }
    double v = net.block.norm_eps;
    b.get("norm_eps", v);
    net.block.norm_eps = static_cast<real_t>(v);
    v = net.block.bn_eps;
    b.get("bn_eps", v);
    net.block.bn_eps = static_cast<real_t>(v);
    v = net.block.bn_momentum;
    b.get("bn_momentum", v);
    net.block.bn_momentum = static_cast<real_t>(v);
    b.get("expand_ratio", net.block.expand_ratio);
    b.get("ffn_ratio", net.block.ffn_ratio);
    b.get("alt3_kernel", net.block.alt3_kernel);
  }
}

void parse_search_space(const json& j, search::RosterSet& rosters) {
  const Section s(j, "search_space", {"max_count", "searchable", "candidates"});
  const search::RosterSet table = search::default_rosters();
  if (s.has("searchable")) {
    if (!s.at("searchable").is_array()) throw s.type("searchable", "an array of stage names");
    std::vector<nn::StageId> keep;
    for (const auto& v : s.at("searchable")) {
      if (!v.is_string()) throw s.type("searchable", "an array of stage names");
      const auto id = wrap("search_space.searchable", [&] { return nn::parse_stage(v.get<std::string>()); });
      if (id == nn::StageId::kMid) throw ConfigError("'search_space.searchable': the middle stage is not searchable");
      keep.push_back(id);
    }
    rosters = search::restrict_rosters(rosters, keep);
  }
  if (s.has("candidates")) {
    const auto& c = require_object(s.at("candidates"), "search_space.candidates");
    for (const auto& [name, list] : c.items()) {
      const std::string path = "search_space.candidates." + name;
      const auto id = wrap(path, [&] { return nn::parse_stage(name); });
      if (!list.is_array() || list.empty()) throw ConfigError(fmt::format("'{}' must be a non-empty array", path));
      const auto& allowed = search::roster_for(table, id);
      search::StageRoster r{id, {}, true};
      for (const auto& v : list) {
        if (!v.is_string()) throw ConfigError(fmt::format("'{}' must hold candidate strings", path));
        const auto spec = wrap(path, [&] { return nn::CandidateSpec::parse(v.get<std::string>()); });
        if (!allowed.index_of(spec)) {
          throw ConfigError(fmt::format("'{}': {} is outside the search space of stage {}", path, spec.id(), name));
        }
        r.candidates.push_back(spec);
      }
      for (auto& existing : rosters) {
        if (existing.stage != id) continue;
        if (!existing.searchable) {
          throw ConfigError(fmt::format("'{}': stage {} is not searchable", path, name));
        }
        existing = r;
      }
    }
  }
  if (s.has("max_count")) {
    std::size_t m = 0;
    s.get("max_count", m);
    if (m == 0) throw ConfigError("'search_space.max_count' must be positive");
    rosters = search::truncate_rosters(rosters, m);
  }
  wrap("search_space", [&] {
    search::validate_rosters(rosters);
    return 0;
  });
}

void parse_cost(const json& j, const std::filesystem::path& base, RunConfig& c) {
  const Section s(j, "cost", {"resolution", "eta", "fold_alt3", "latency_table"});
  if (s.has("resolution")) {
    std::string r;
    s.get("resolution", r);
    c.cost.resolution = wrap("cost.resolution", [&] { return cost::parse_resolution(r); });
  }
  s.get("eta", c.cost.eta);
  s.get("fold_alt3", c.cost.fold_alt3);
  if (s.has("latency_table")) {
    std::string p;
    s.get("latency_table", p);
    c.latency_table = resolve(base, p);
  }
}

void parse_data(const json& j, const std::filesystem::path& base, data::DatasetConfig& d) {
  const Section s(j, "data",
                  {"source", "directory", "patch_size", "num_patches", "channels", "sigmas", "train_fraction", "seed"});
  std::string source = d.source == data::Source::kProcedural ? "procedural" : "directory";
  s.get("source", source);
  if (source == "procedural") {
    d.source = data::Source::kProcedural;
  } else if (source == "directory") {
    d.source = data::Source::kDirectory;
  } else {
    throw ConfigError(fmt::format("'data.source' must be \"procedural\" or \"directory\", got \"{}\"", source));
  }
  if (s.has("directory")) {
    std::string p;
    s.get("directory", p);
    d.directory = resolve(base, p).string();
  }
  s.get("patch_size", d.patch_size);
  s.get("num_patches", d.num_patches);
  s.get("channels", d.channels);
  s.get("sigmas", d.sigmas);
  s.get("train_fraction", d.train_fraction);
  s.get("seed", d.seed, 0);
}

void parse_train(const json& j, search::TrainConfig& t) {
  const Section s(j, "search",
                  {"epochs", "steps_per_epoch", "batch_size", "lr_weights", "lr_arch", "beta", "lambda_start",
                   "lambda_end", "temperature", "normalized_entropy", "adam_beta1", "adam_beta2", "adam_eps", "seed"});
  s.get("epochs", t.epochs);
  s.get("steps_per_epoch", t.steps_per_epoch);
  s.get("batch_size", t.batch_size);
  s.get("lr_weights", t.lr_weights);
  s.get("lr_arch", t.lr_arch);
  s.get("beta", t.beta);
  s.get("lambda_start", t.lambda_start);
  s.get("lambda_end", t.lambda_end);
  s.get("temperature", t.temperature);
  s.get("normalized_entropy", t.normalized_entropy);
  s.get("adam_beta1", t.adam_beta1);
  s.get("adam_beta2", t.adam_beta2);
  s.get("adam_eps", t.adam_eps);
  s.get("seed", t.seed, 0);
}

void parse_finetune(const json& j, search::FinetuneConfig& f) {
  const Section s(j, "finetune",
                  {"epochs", "steps_per_epoch", "batch_size", "lr", "adam_beta1", "adam_beta2", "adam_eps", "seed"});
  s.get("epochs", f.epochs);
  s.get("steps_per_epoch", f.steps_per_epoch);
  s.get("batch_size", f.batch_size);
  s.get("lr", f.lr);
  s.get("adam_beta1", f.adam_beta1);
  s.get("adam_beta2", f.adam_beta2);
  s.get("adam_eps", f.adam_eps);
  s.get("seed", f.seed, 0);
}

}  // namespace

void RunConfig::validate() const {
  wrap("network", [&] {
    network.validate();
    return 0;
  });
  wrap("search_space", [&] {
    search::validate_rosters(rosters);
    return 0;
  });
  for (const auto& r : rosters) {
    if (r.searchable && r.stage == nn::StageId::kMid) throw ConfigError("the middle stage is not searchable");
  }
  if (!(cost.eta >= 0 && cost.eta <= 1)) throw ConfigError(fmt::format("'cost.eta' must lie in [0, 1], got {}", cost.eta));
  if (cost.resolution.height % nn::kDownsamplingFactor != 0 || cost.resolution.width % nn::kDownsamplingFactor != 0) {
    throw ConfigError(fmt::format("'cost.resolution' must be divisible by {}", nn::kDownsamplingFactor));
  }
  if (cost.eta < 1 && !latency_table) throw ConfigError("'cost.eta' < 1 needs 'cost.latency_table'");
  wrap("data", [&] {
    data.validate();
    return 0;
  });
  if (data.source == data::Source::kProcedural && data.channels != network.input_channels) {
    throw ConfigError(fmt::format("'data.channels' ({}) must equal 'network.input_channels' ({})", data.channels,
                                  network.input_channels));
  }
  if (data.source == data::Source::kDirectory && network.input_channels != 3) {
    throw ConfigError("directory datasets are RGB; 'network.input_channels' must be 3");
  }
  wrap("search", [&] {
    search.validate();
    return 0;
  });
  wrap("finetune", [&] {
    finetune.validate();
    return 0;
  });
  if (eval_sigmas.empty()) throw ConfigError("'eval.sigmas' must not be empty");
  for (double s : eval_sigmas) {
    if (!(s >= 0)) throw ConfigError(fmt::format("'eval.sigmas' must be non-negative, got {}", s));
  }
  if (output_dir.empty()) throw ConfigError("'output_dir' must not be empty");
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  const Section root(doc, "",
                     {"network", "search_space", "cost", "data", "search", "finetune", "eval", "pareto", "output_dir"});
  RunConfig c;
  if (root.has("network")) parse_network(root.at("network"), c.network);
  if (root.has("search_space")) parse_search_space(root.at("search_space"), c.rosters);
  if (root.has("cost")) parse_cost(root.at("cost"), base_dir, c);
  if (root.has("data")) parse_data(root.at("data"), base_dir, c.data);
  if (root.has("search")) parse_train(root.at("search"), c.search);
  if (root.has("finetune")) parse_finetune(root.at("finetune"), c.finetune);
  if (root.has("eval")) {
    const Section e(root.at("eval"), "eval", {"sigmas"});
    e.get("sigmas", c.eval_sigmas);
  }
  if (root.has("pareto")) {
    const Section p(root.at("pareto"), "pareto", {"points"});
    if (p.has("points")) {
      std::string path;
      p.get("points", path);
      c.pareto_points = resolve(base_dir, path);
    }
  }
  root.get("output_dir", c.output_dir);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return parse_run_config(doc, path.parent_path());
}

}  // namespace dnas::cli
