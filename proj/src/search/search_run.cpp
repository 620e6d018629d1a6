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

#include "dnas/search/search_run.hpp"

#include <fstream>

#include <fmt/format.h>

#include "dnas/nn/param_store.hpp"

namespace dnas::search {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "dnas-search-run/1";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

}  // namespace

json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"steps_per_epoch", c.steps_per_epoch},
          {"batch_size", c.batch_size},
          {"lr_weights", c.lr_weights},
          {"lr_arch", c.lr_arch},
          {"beta", c.beta},
          {"lambda_start", c.lambda_start},
          {"lambda_end", c.lambda_end},
          {"temperature", c.temperature},
          {"normalized_entropy", c.normalized_entropy},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.steps_per_epoch = j.at("steps_per_epoch").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.lr_weights = j.at("lr_weights").get<double>();
  c.lr_arch = j.at("lr_arch").get<double>();
  c.beta = j.at("beta").get<double>();
  c.lambda_start = j.at("lambda_start").get<double>();
  c.lambda_end = j.at("lambda_end").get<double>();
  c.temperature = j.at("temperature").get<double>();
  c.normalized_entropy = j.at("normalized_entropy").get<bool>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json rosters_to_json(const RosterSet& rosters) {
  json out = json::array();
  for (const auto& r : rosters) {
    json cands = json::array();
    for (const auto& c : r.candidates) cands.push_back(c.id());
    out.push_back({{"stage", nn::stage_name(r.stage)}, {"searchable", r.searchable}, {"candidates", cands}});
  }
  return out;
}

RosterSet rosters_from_json(const json& j) {
  RosterSet out;
  for (const auto& r : j) {
    StageRoster s;
    s.stage = nn::parse_stage(r.at("stage").get<std::string>());
    s.searchable = r.at("searchable").get<bool>();
    for (const auto& c : r.at("candidates")) s.candidates.push_back(nn::CandidateSpec::parse(c.get<std::string>()));
    out.push_back(std::move(s));
  }
  validate_rosters(out);
  return out;
}

json run_to_json(const SearchRun& run) {
  json trace = json::array();
  for (const auto& t : run.trace) {
    trace.push_back({{"epoch", t.epoch},
                     {"lambda", t.lambda},
                     {"task_loss", t.task_loss},
                     {"penalty_loss", t.penalty_loss},
                     {"entropy_loss", t.entropy_loss},
                     {"total_loss", t.total_loss},
                     {"mean_entropy", t.mean_entropy}});
  }
  json history = json::array();
  for (std::size_t e = 0; e < run.alpha_history.size(); ++e) {
    history.push_back({{"epoch", e}, {"alpha", run.alpha_history[e]}});
  }
  return {{"format", kFormat},
          {"train", train_config_to_json(run.train)},
          {"base", nn::config_to_json(run.base)},
          {"rosters", rosters_to_json(run.rosters)},
          {"trace", trace},
          {"alpha_history", history},
          {"derived", nn::config_to_json(run.derived)}};
}

SearchRun run_from_json(const json& j) {
  if (j.value("format", "") != kFormat) {
    throw std::runtime_error(fmt::format("not a search run document (format '{}')", j.value("format", "")));
  }
  SearchRun run;
  run.train = train_config_from_json(j.at("train"));
  run.base = nn::config_from_json(j.at("base"));
  run.rosters = rosters_from_json(j.at("rosters"));
  for (const auto& t : j.at("trace")) {
    run.trace.push_back({t.at("epoch").get<std::size_t>(), t.at("lambda").get<double>(),
                         t.at("task_loss").get<double>(), t.at("penalty_loss").get<double>(),
                         t.at("entropy_loss").get<double>(), t.at("total_loss").get<double>(),
                         t.at("mean_entropy").get<double>()});
  }
  if (!j.contains("alpha_history")) throw std::runtime_error("search run has no alpha_history");
  for (const auto& h : j.at("alpha_history")) run.alpha_history.push_back(h.at("alpha").get<AlphaSnapshot>());
  run.derived = nn::config_from_json(j.at("derived"));
  return run;
}

void save_run(const std::filesystem::path& path, const SearchRun& run) {
  auto out = open_out(path);
  out << run_to_json(run).dump(2) << '\n';
}

SearchRun load_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
  try {
    return run_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

void write_alpha_history_csv(const std::filesystem::path& path, const SearchRun& run) {
  auto out = open_out(path);
  out << "epoch,stage,candidate,alpha\n";
  for (std::size_t e = 0; e < run.alpha_history.size(); ++e) {
    // Stage order follows the network, candidate order the roster.
    for (const auto& r : run.rosters) {
      const auto it = run.alpha_history[e].find(std::string(nn::stage_name(r.stage)));
      if (it == run.alpha_history[e].end()) continue;
      for (const auto& c : r.candidates) {
        out << fmt::format("{},{},{},{:.17g}\n", e, nn::stage_name(r.stage), c.id(), it->second.at(c.id()));
      }
    }
  }
}

void write_trace_csv(const std::filesystem::path& path, const SearchRun& run) {
  auto out = open_out(path);
  out << "epoch,lambda,task_loss,penalty_loss,entropy_loss,total_loss,mean_entropy\n";
  for (const auto& t : run.trace) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", t.epoch, t.lambda, t.task_loss,
                       t.penalty_loss, t.entropy_loss, t.total_loss, t.mean_entropy);
  }
}

}  // namespace dnas::search
