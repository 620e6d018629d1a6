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

#include "dnas/cli/commands.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dnas/cost/report.hpp"
#include "dnas/nn/param_store.hpp"
#include "dnas/search/derive.hpp"
#include "dnas/search/search_run.hpp"

namespace dnas::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

cost::CostTable make_cost_table(const RunConfig& config, const CommandOptions& options,
                                const search::RosterSet& rosters, const nn::UNetConfig& net) {
  cost::CostTableOptions opts = config.cost;
  if (options.resolution) opts.resolution = cost::parse_resolution(*options.resolution);
  std::optional<cost::LatencyTable> latency;
  const auto path = options.latency_table ? options.latency_table : config.latency_table;
  if (path) {
    latency = cost::LatencyTable::load(*path);
  } else if (opts.eta < 1) {
    throw std::runtime_error("eta < 1 needs a latency table");
  }
  return cost::build_cost_table(rosters, net, opts, latency ? &*latency : nullptr);
}

void print_architecture(std::ostream& log, const nn::UNetConfig& derived, const search::RosterSet& rosters,
                        const search::Encodings* encodings) {
  for (const auto& r : rosters) {
    if (!r.searchable) continue;
    const std::string stage(nn::stage_name(r.stage));
    const std::string id = derived.stage(r.stage).id();
    if (encodings) {
      fmt::print(log, "  {:<5} {:<7} alpha {:.3g}\n", stage, id, encodings->at(stage).at(id));
    } else {
      fmt::print(log, "  {:<5} {}\n", stage, id);
    }
  }
}

void write_derivation(const fs::path& out_dir, const RunConfig& config, const CommandOptions& options,
                      const nn::UNetConfig& base, const nn::UNetConfig& derived, const cost::CostTable& table,
                      const std::vector<double>& penalty_trace, std::ostream& log) {
  write_json(out_dir / "derived_config.json", nn::config_to_json(derived));
  cost::ReportInput in;
  in.base = base;
  in.derived = derived;
  in.resolution = options.resolution ? cost::parse_resolution(*options.resolution) : config.cost.resolution;
  in.fold_alt3 = config.cost.fold_alt3;
  in.penalty_trace = penalty_trace;
  const json report = cost::make_report(in, table);
  write_json(out_dir / "report.json", report);
  fmt::print(log, "complexity at {}x{}: base {:.2f} GMACs, derived {:.2f} GMACs (ratio {:.3f}), parameters {:+.1f}%\n",
             in.resolution.height, in.resolution.width, report["base"]["gmacs"].get<double>(),
             report["derived"]["gmacs"].get<double>(), report["mac_ratio"].get<double>(),
             -report["param_reduction_pct"].get<double>());
}

data::Dataset make_dataset(const RunConfig& config) { return data::Dataset::make(config.data); }

/// Loads a parameter container written by finetune (or any network saved
/// with its config in the attributes).
nn::Network load_model(const fs::path& path) {
  const nn::ParamFile file = nn::load_params(path);
  if (!file.attributes.contains("config")) {
    throw std::runtime_error(fmt::format("'{}' carries no network config", path.string()));
  }
  nn::Rng rng(0);
  nn::Network net(nn::config_from_json(file.attributes.at("config")), nn::InitScheme::kTraining, rng);
  nn::assign_params(net.parameters(), file.tensors);
  return net;
}

void write_metadata(const fs::path& out_dir, const std::string& command,
                    std::chrono::system_clock::time_point started, double seconds) {
  char host[256] = {};
  if (gethostname(host, sizeof(host) - 1) != 0) host[0] = '\0';
  const auto finished = std::chrono::system_clock::now();
  auto stamp = [](std::chrono::system_clock::time_point t) {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(t)));
  };
  fs::create_directories(out_dir / "metadata");
  write_json(out_dir / "metadata" / (command + ".json"), {{"command", command},
                                                           {"started_utc", stamp(started)},
                                                           {"finished_utc", stamp(finished)},
                                                           {"wall_seconds", seconds},
                                                           {"host", host}});
}

}  // namespace

fs::path output_directory(const RunConfig& config, const CommandOptions& options) {
  if (options.output) return *options.output;
  const fs::path dir(config.output_dir);
  if (dir.is_absolute()) return dir;
  const char* root = std::getenv("DNAS_OUTPUT_ROOT");
  return (root != nullptr && *root != '\0') ? fs::path(root) / dir : dir;
}

void cmd_costs(const RunConfig& config, const CommandOptions& options, const fs::path& out_dir, std::ostream& log) {
  const cost::CostTable table = make_cost_table(config, options, config.rosters, config.network);
  {
    auto out = open_out(out_dir / "cost_table.csv");
    cost::write_cost_table_csv(out, table);
  }
  const cost::Resolution res = options.resolution ? cost::parse_resolution(*options.resolution) : config.cost.resolution;
  const cost::OpCost total = cost::network_cost(config.network, res, config.cost.fold_alt3);
  json stages = json::array();
  for (nn::StageId id : nn::kStageOrder) {
    const auto c = cost::candidate_cost(config.network.stage(id), config.network.stage_channels(id),
                                        cost::stage_resolution(id, res), config.network.block, config.cost.fold_alt3);
    stages.push_back({{"stage", nn::stage_name(id)},
                      {"candidate", config.network.stage(id).id()},
                      {"channels", config.network.stage_channels(id)},
                      {"macs", c.macs},
                      {"params", c.params}});
  }
  write_json(out_dir / "network_costs.json", {{"resolution", fmt::format("{}x{}", res.height, res.width)},
                                              {"alt3_folded", config.cost.fold_alt3},
                                              {"network", nn::config_to_json(config.network)},
                                              {"macs", total.macs},
                                              {"gmacs", total.gmacs()},
                                              {"params", total.params},
                                              {"stages", stages}});
  std::size_t rows = 0;
  for (const auto& s : table.stages()) rows += s.entries.size();
  fmt::print(log, "network at {}x{}: {:.2f} GMACs, {} parameters; {} candidate rows written\n", res.height,
             res.width, total.gmacs(), total.params, rows);
}

void cmd_search(const RunConfig& config, const CommandOptions& options, const fs::path& out_dir, std::ostream& log) {
  const cost::CostTable table = make_cost_table(config, options, config.rosters, config.network);
  const data::Dataset ds = make_dataset(config);
  data::BatchSampler sampler(ds.train_patches(), config.search.batch_size, config.data.sigmas, config.search.seed);
  search::Supernet supernet(config.network, config.rosters, nn::InitScheme::kTraining, config.search.seed,
                            static_cast<real_t>(config.search.temperature));
  const search::SearchRun run = search::train_supernet(supernet, [&] { return sampler.next(); }, table, config.search);

  search::save_run(out_dir / "run.json", run);
  search::write_alpha_history_csv(out_dir / "alpha_history.csv", run);
  search::write_trace_csv(out_dir / "loss_trace.csv", run);
  nn::save_params(out_dir / "supernet.params", supernet.network().parameters(),
                  {{"kind", "supernet"}, {"base", nn::config_to_json(run.base)},
                   {"rosters", search::rosters_to_json(run.rosters)}});

  std::vector<double> penalties;
  for (const auto& t : run.trace) penalties.push_back(t.penalty_loss);
  fmt::print(log, "search finished: {} epochs, final L_T {:.6g}, mean normalized entropy {:.4f}\n", run.trace.size(),
             run.trace.back().task_loss, run.trace.back().mean_entropy);
  fmt::print(log, "derived architecture:\n");
  print_architecture(log, run.derived, run.rosters, &run.alpha_history.back());
  write_derivation(out_dir, config, options, run.base, run.derived, table, penalties, log);
}

void cmd_derive(const RunConfig& config, const CommandOptions& options, const fs::path& out_dir, std::ostream& log) {
  if (options.run && options.encodings) throw std::invalid_argument("give either --run or --encodings, not both");
  nn::UNetConfig base = config.network;
  search::RosterSet rosters = config.rosters;
  search::Encodings enc;
  std::vector<double> penalties;
  if (options.encodings) {
    const json doc = read_json(*options.encodings);
    enc = (doc.contains("encodings") ? doc.at("encodings") : doc).get<search::Encodings>();
  } else {
    const fs::path path = options.run ? *options.run : out_dir / "run.json";
    const search::SearchRun run = search::load_run(path);
    if (run.alpha_history.empty()) throw std::runtime_error(fmt::format("'{}' has an empty alpha_history", path.string()));
    enc = run.alpha_history.back();
    base = run.base;
    rosters = run.rosters;
    for (const auto& t : run.trace) penalties.push_back(t.penalty_loss);
  }
  const cost::CostTable table = make_cost_table(config, options, rosters, base);
  const nn::UNetConfig derived = search::derive_architecture(enc, rosters, base, &table);
  fmt::print(log, "derived architecture:\n");
  print_architecture(log, derived, rosters, &enc);
  write_derivation(out_dir, config, options, base, derived, table, penalties, log);
}

void cmd_finetune(const RunConfig& config, const CommandOptions& options, const fs::path& out_dir,
                  std::ostream& log) {
  const search::SearchRun run = search::load_run(options.run ? *options.run : out_dir / "run.json");
  const nn::ParamFile weights = nn::load_params(options.supernet ? *options.supernet : out_dir / "supernet.params");
  search::Supernet supernet(run.base, run.rosters, nn::InitScheme::kTraining, 0);
  nn::assign_params(supernet.network().parameters(), weights.tensors);
  const nn::UNetConfig derived =
      options.derived ? nn::config_from_json(read_json(*options.derived)) : run.derived;
  nn::Network net = search::inherit_network(supernet, derived);

  const data::Dataset ds = make_dataset(config);
  const auto pairs = ds.held_out_pairs(config.eval_sigmas);
  const auto before = search::evaluate(net, pairs);
  data::BatchSampler sampler(ds.train_patches(), config.finetune.batch_size, config.data.sigmas,
                             config.finetune.seed);
  const auto trace = search::finetune(net, [&] { return sampler.next(); }, config.finetune);
  const auto after = search::evaluate(net, pairs);

  nn::save_params(out_dir / "model.params", net.parameters(),
                  {{"kind", "network"}, {"config", nn::config_to_json(derived)}});
  {
    auto out = open_out(out_dir / "finetune_trace.csv");
    out << "epoch,task_loss\n";
    for (std::size_t e = 0; e < trace.size(); ++e) out << e << ',' << num(trace[e]) << '\n';
  }
  {
    auto out = open_out(out_dir / "finetune_summary.csv");
    out << "phase,psnr,ssim,noisy_psnr,noisy_ssim\n";
    for (const auto& [name, s] : {std::pair{"inherited", before}, std::pair{"finetuned", after}}) {
      out << name << ',' << num(s.mean_psnr) << ',' << num(s.mean_ssim) << ',' << num(s.mean_noisy_psnr) << ','
          << num(s.mean_noisy_ssim) << '\n';
    }
  }
  fmt::print(log, "fine-tuned {} parameters for {} epochs; held-out PSNR {:.2f} -> {:.2f} dB (noisy {:.2f} dB)\n",
             net.parameter_count(), trace.size(), before.mean_psnr, after.mean_psnr, after.mean_noisy_psnr);
}

void cmd_eval(const RunConfig& config, const CommandOptions& options, const fs::path& out_dir, std::ostream& log) {
  nn::Network net = load_model(options.model ? *options.model : out_dir / "model.params");
  const data::Dataset ds = make_dataset(config);
  const auto summary = search::evaluate(net, ds.held_out_pairs(config.eval_sigmas));
  {
    auto out = open_out(out_dir / "eval.csv");
    out << "image,sigma,psnr,ssim,noisy_psnr,noisy_ssim\n";
    for (const auto& r : summary.rows) {
      out << r.image << ',' << num(r.sigma) << ',' << num(r.psnr) << ',' << num(r.ssim) << ',' << num(r.noisy_psnr)
          << ',' << num(r.noisy_ssim) << '\n';
    }
  }
  auto out = open_out(out_dir / "eval_summary.csv");
  out << "sigma,images,psnr,ssim,noisy_psnr,noisy_ssim\n";
  for (double s : config.eval_sigmas) {
    double p = 0, q = 0, np = 0, nq = 0;
    std::size_t n = 0;
    for (const auto& r : summary.rows) {
      if (r.sigma != s) continue;
      p += r.psnr;
      q += r.ssim;
      np += r.noisy_psnr;
      nq += r.noisy_ssim;
      ++n;
    }
    const double d = static_cast<double>(n);
    out << num(s) << ',' << n << ',' << num(p / d) << ',' << num(q / d) << ',' << num(np / d) << ',' << num(nq / d)
        << '\n';
    fmt::print(log, "sigma {:>5}: PSNR {:.2f} dB (noisy {:.2f}), SSIM {:.4f} (noisy {:.4f}) over {} images\n", s,
               p / d, np / d, q / d, nq / d, n);
  }
}

void cmd_pareto(const RunConfig& config, const CommandOptions& options, const fs::path& out_dir,
                std::ostream& log) {
  const auto path = options.points ? options.points : config.pareto_points;
  if (!path) throw std::invalid_argument("pareto needs --points FILE or pareto.points in the config");
  std::ifstream in(*path);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path->string()));
  std::vector<cost::ParetoPoint> points;
  try {
    points = cost::read_points_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("'{}': {}", path->string(), e.what()));
  }
  const auto front = cost::pareto_front(points);
  {
    auto out = open_out(out_dir / "front.csv");
    cost::write_points_csv(out, front);
  }
  auto out = open_out(out_dir / "pareto_plot.dat");
  cost::write_plot_data(out, points, front);
  fmt::print(log, "{} of {} points are non-dominated:\n", front.size(), points.size());
  for (const auto& p : front) fmt::print(log, "  {:<16} quality {:g}, cost {:g}\n", p.label, p.quality, p.cost);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy-regularized differentiable architecture search for a denoising U-Net", "dnas"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  std::string config_path;
  std::string output, latency, resolution, run, encodings, supernet, derived, model, points;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config_path, "Run configuration (JSON)");
    if (config_required) c->required();
    sub->add_option("--output", output, "Output directory (overrides config and DNAS_OUTPUT_ROOT)");
    return sub;
  };
  auto* costs = add_common(app.add_subcommand("costs", "Per-candidate MAC/parameter/penalty table"), true);
  costs->add_option("--latency-table", latency, "Measured latencies (JSON)");
  costs->add_option("--resolution", resolution, "Input resolution HxW");
  auto* search_cmd = add_common(app.add_subcommand("search", "Train the supernet and derive an architecture"), true);
  search_cmd->add_option("--latency-table", latency, "Measured latencies (JSON)");
  auto* derive = add_common(app.add_subcommand("derive", "Pick the highest-encoding candidate per stage"), true);
  derive->add_option("--run", run, "Search run document (default: <output>/run.json)");
  derive->add_option("--encodings", encodings, "Encodings file {stage: {candidate: alpha}}");
  derive->add_option("--resolution", resolution, "Resolution for the complexity report");
  auto* finetune = add_common(app.add_subcommand("finetune", "Fine-tune the derived network"), true);
  finetune->add_option("--run", run, "Search run document (default: <output>/run.json)");
  finetune->add_option("--supernet", supernet, "Supernet weights (default: <output>/supernet.params)");
  finetune->add_option("--derived", derived, "Derived config JSON (default: the run's derivation)");
  auto* eval = add_common(app.add_subcommand("eval", "PSNR/SSIM on held-out patches per sigma"), true);
  eval->add_option("--model", model, "Network weights (default: <output>/model.params)");
  auto* pareto = add_common(app.add_subcommand("pareto", "Non-dominated front of quality/cost points"), false);
  pareto->add_option("--points", points, "CSV with header label,quality,cost");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'dnas --help' for usage\n";
    return kExitUsage;
  }

  CommandOptions options;
  auto set = [](const std::string& v, auto& dst) {
    if (!v.empty()) dst = v;
  };
  set(output, options.output);
  set(latency, options.latency_table);
  set(resolution, options.resolution);
  set(run, options.run);
  set(encodings, options.encodings);
  set(supernet, options.supernet);
  set(derived, options.derived);
  set(model, options.model);
  set(points, options.points);

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig config;
  try {
    if (!config_path.empty()) config = load_run_config(config_path);
    if (options.resolution) (void)cost::parse_resolution(*options.resolution);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const fs::path out_dir = output_directory(config, options);
    fs::create_directories(out_dir);
    if (command == "costs") cmd_costs(config, options, out_dir, out);
    if (command == "search") cmd_search(config, options, out_dir, out);
    if (command == "derive") cmd_derive(config, options, out_dir, out);
    if (command == "finetune") cmd_finetune(config, options, out_dir, out);
    if (command == "eval") cmd_eval(config, options, out_dir, out);
    if (command == "pareto") cmd_pareto(config, options, out_dir, out);
    write_metadata(out_dir, command, started,
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    out << "results written to " << out_dir.string() << '\n';
  } catch (const std::exception& e) {
    err << command << " failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dnas::cli
