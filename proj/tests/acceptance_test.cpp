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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers as arguments to run a
// subset.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dnas/cli/commands.hpp"
#include "dnas/cost/report.hpp"
#include "dnas/nn/param_store.hpp"
#include "dnas/search/derive.hpp"
#include "dnas/search/finetune.hpp"
#include "dnas/search/losses.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/nn_helpers.hpp"
#include "support/search_helpers.hpp"

namespace dnas {
namespace {

namespace fs = std::filesystem;
using nn::BlockKind;
using nn::StageId;
using testing::gradcheck;
using testing::project;
using testing::random_tensor;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1: gradients ----------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, double> worst;
  auto check = [&](const std::string& name, std::vector<testing::GradCheckTarget> targets,
                   const std::function<Tensor()>& loss) {
    worst[name] = std::max(worst[name], gradcheck(std::move(targets), loss));
  };
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    std::mt19937_64 rng(500 + trial);
    {
      for (std::size_t groups : {1, 2}) {
        for (auto [k, stride, pad] : {std::tuple{1, 1, 0}, {3, 1, 1}, {2, 2, 0}, {3, 2, 1}}) {
          Tensor x = random_tensor({2, 2 * groups, 5, 6}, rng, -1, 1, true);
          Tensor w = random_tensor({2 * groups, 2, std::size_t(k), std::size_t(k)}, rng, -1, 1, true);
          Tensor b = random_tensor({2 * groups}, rng, -1, 1, true);
          ops::Conv2dOptions o{.stride = std::size_t(stride), .padding = std::size_t(pad), .groups = groups};
          check("conv2d", {{&x}, {&w}, {&b}}, [&] { return project(ops::conv2d(x, w, b, o), 1); });
        }
      }
    }
    {
      Tensor x = random_tensor({2, 3, 3, 4}, rng, -2, 2, true);
      Tensor g = random_tensor({3}, rng, 0.5, 1.5, true), b = random_tensor({3}, rng, -1, 1, true);
      for (auto axes : {ops::NormAxes::kSample, ops::NormAxes::kChannel}) {
        check("layer_norm", {{&x}, {&g}, {&b}}, [&] { return project(ops::layer_norm(x, g, b, 1e-6, axes), 2); });
      }
      Tensor rm = random_tensor({3}, rng), rv = random_tensor({3}, rng, 0.5, 2);
      for (bool training : {false, true}) {
        check("batch_norm", {{&x}, {&g}, {&b}}, [&] {
          return project(ops::batch_norm(x, rm, rv, g, b, {.eps = 1e-5, .training = training}), 3);
        });
      }
    }
    {
      Tensor a = random_tensor({2, 3, 4}, rng, -1, 1, true), b = random_tensor({2, 3, 4}, rng, -1, 1, true);
      Tensor pos = random_tensor({5}, rng, 0.2, 2, true), s = random_tensor({1}, rng, -1, 1, true);
      check("add", {{&a}, {&b}}, [&] { return project(ops::add(a, b), 4); });
      check("sub", {{&a}, {&b}}, [&] { return project(ops::sub(a, b), 5); });
      check("mul", {{&a}, {&b}}, [&] { return project(ops::mul(a, b), 6); });
      check("mse_loss", {{&a}, {&b}}, [&] { return ops::mse_loss(a, b); });
      check("add_scalar", {{&a}}, [&] { return project(ops::add_scalar(a, 0.3), 7); });
      check("mul_scalar", {{&a}}, [&] { return project(ops::mul_scalar(a, -1.3), 8); });
      check("scale", {{&a}, {&s}}, [&] { return project(ops::scale(a, s), 9); });
      check("relu", {{&a}}, [&] { return project(ops::relu(a), 10); });
      check("sigmoid", {{&a}}, [&] { return project(ops::sigmoid(a), 11); });
      check("exp", {{&a}}, [&] { return project(ops::exp(a), 12); });
      check("log", {{&pos}}, [&] { return project(ops::log(pos), 13); });
      check("xlogx", {{&pos}}, [&] { return project(ops::xlogx(pos), 14); });
      check("sum", {{&a}}, [&] { return ops::sum(ops::mul(a, a)); });
      check("mean", {{&a}}, [&] { return ops::mean(ops::mul(a, a)); });
    }
    {
      Tensor x = random_tensor({2, 4, 3, 2}, rng, -1, 1, true), s = random_tensor({2, 4, 1, 1}, rng, -1, 1, true);
      Tensor y = random_tensor({1, 8, 2, 3}, rng, -1, 1, true);
      check("split_halves_channelwise", {{&x}}, [&] {
        auto [a, b] = ops::split_halves_channelwise(x);
        return ops::add(project(a, 15), project(b, 16));
      });
      check("simple_gate", {{&x}}, [&] { return project(ops::simple_gate(x), 17); });
      check("global_avg_pool", {{&x}}, [&] { return project(ops::global_avg_pool(x), 18); });
      check("mul_channelwise", {{&x}, {&s}}, [&] { return project(ops::mul_channelwise(x, s), 19); });
      check("pixel_shuffle", {{&y}}, [&] { return project(ops::pixel_shuffle(y, 2), 20); });
    }
    {
      Tensor v = random_tensor({5}, rng, -2, 2, true);
      check("softmax", {{&v}}, [&] { return project(ops::softmax(v, 0.7), 21); });
      check("select", {{&v}}, [&] { return ops::mul(ops::select(v, 4), ops::select(v, 1)); });
      std::vector<Tensor> xs;
      for (int i = 0; i < 5; ++i) xs.push_back(random_tensor({2, 3}, rng, -1, 1, true));
      std::vector<testing::GradCheckTarget> t{{&v}};
      for (auto& x : xs) t.push_back({&x});
      check("weighted_sum", t, [&] { return project(ops::weighted_sum(xs, ops::softmax(v, 1)), 22); });
    }
  }

  // Full composite loss on a two-stage, three-candidate supernet: every
  // element of phi, plus random directions through the weights (individual
  // weight entries are either roundoff- or ReLU-kink-limited under finite
  // differences; their primitives are checked element-wise above).
  for (std::uint64_t seed : {99, 100, 101, 102, 103, 104, 105, 106, 107}) {
    std::mt19937_64 rng(seed);
    const auto rosters = testing::micro_rosters();
    search::Supernet net(testing::tiny_base(), rosters, nn::InitScheme::kTraining, seed);
    testing::randomize(net.network().parameters(), rng, -0.3, 0.3);
    std::normal_distribution<double> n(0, 1);
    for (const auto& s : net.arch().slots()) net.arch().set_phi(s.stage, {n(rng), n(rng), n(rng)});
    const auto costs = testing::penalty_table(rosters, {{0.2, 1, 0.5}, {1, 0.3, 0.6}});
    const Tensor x = random_tensor({2, 3, 16, 16}, rng, 0, 1), y = random_tensor({2, 3, 16, 16}, rng, 0, 1);
    auto loss = [&] {
      const Tensor task = search::training_loss(net.forward(x, nn::Mode::kTrain), y);
      return search::total_loss(task, search::penalty_loss(net.arch(), costs), search::entropy_loss(net.arch()),
                                0.7, 0.3);
    };
    auto phi = net.arch().parameters();
    auto weights = net.network().trainable();
    std::vector<testing::GradCheckTarget> phi_targets;
    for (auto& p : phi) phi_targets.push_back({&p, {}});
    check("composite loss wrt phi", phi_targets, loss);
    std::vector<Tensor*> w_leaves, all_leaves;
    for (auto& w : weights) w_leaves.push_back(&w);
    all_leaves = w_leaves;
    for (auto& p : phi) all_leaves.push_back(&p);
    for (int d = 0; d < 3; ++d) {
      auto& e = worst["composite loss along weight directions"];
      e = std::max(e, testing::directional_gradcheck(w_leaves, loss, rng));
      auto& f = worst["composite loss along joint directions"];
      f = std::max(f, testing::directional_gradcheck(all_leaves, loss, rng));
    }
  }

  double max_err = 0;
  std::string worst_name;
  for (const auto& [name, e] : worst) {
    if (e >= max_err) {
      max_err = e;
      worst_name = name;
    }
  }
  const double secs = seconds_since(t0);
  const bool is_double = sizeof(real_t) == 8;
  return {max_err < 1e-4 && secs < 120 && is_double,
          fmt::format("{} checks, max rel err {:.2e} ({}), {:.1f} s, {}-bit", worst.size(), max_err, worst_name, secs,
                      8 * sizeof(real_t))};
}

// ---- 2: loss decomposition -------------------------------------------------

Outcome loss_decomposition() {
  std::mt19937_64 rng(2);
  const auto rosters = testing::micro_rosters();
  search::Supernet net(testing::tiny_base(), rosters, nn::InitScheme::kTraining, 2);
  testing::randomize(net.network().parameters(), rng, -0.3, 0.3);
  const Tensor x = random_tensor({2, 3, 16, 16}, rng, 0, 1), y = random_tensor({2, 3, 16, 16}, rng, 0, 1);
  const auto costs = testing::penalty_table(rosters, {{0.2, 1, 0.5}, {1, 0.3, 0.6}});
  const Tensor task = search::training_loss(net.forward(x, nn::Mode::kEval), y);
  const double total =
      search::total_loss(task, search::penalty_loss(net.arch(), costs), search::entropy_loss(net.arch()), 0, 0).item();
  double mse = 0;
  {
    NoGradGuard g;
    const Tensor pred = net.forward(x, nn::Mode::kEval);
    for (std::size_t i = 0; i < pred.numel(); ++i) mse += std::pow(pred.data()[i] - y.data()[i], 2);
    mse /= static_cast<double>(pred.numel());
  }
  const double diff = std::abs(total - mse);

  search::RosterSet four = search::restrict_rosters(search::default_rosters(), {StageId::kEnc1});
  four[0].candidates.resize(4);
  search::ArchState uniform(four);
  const double h_uniform = search::entropy_loss(uniform, true).item();
  search::ArchState onehot(four);
  onehot.set_phi(StageId::kEnc1, {0, 0, 900, 0});
  const double h_onehot = search::entropy_loss(onehot, true).item();
  return {diff < 1e-12 && h_onehot == 0.0 && h_uniform == 1.0,
          fmt::format("|L - MSE| = {:.1e}, one-hot entropy {}, uniform K=4 normalized entropy {:.17g}", diff, h_onehot,
                      h_uniform)};
}

// ---- 3: derivation ---------------------------------------------------------

Outcome derivation_oracle() {
  nn::UNetConfig base;
  base.width = 64;
  const auto rosters = search::default_rosters();
  const auto table = cost::build_cost_table(rosters, base, {});
  const auto derived = search::derive_architecture(testing::reference_encodings(), rosters, base, &table);
  const auto expected = testing::reference_derived_config(base);
  std::string got;
  for (const auto& r : rosters) {
    if (r.searchable) got += fmt::format("{}={} ", nn::stage_name(r.stage), derived.stage(r.stage).id());
  }
  return {derived == expected, got};
}

// ---- 4: cost model ---------------------------------------------------------

Outcome cost_regression() {
  const auto t0 = std::chrono::steady_clock::now();
  nn::UNetConfig base;
  base.width = 64;
  const auto derived = search::derive_architecture(testing::reference_encodings(), search::default_rosters(), base);
  const auto s = cost::compare_complexity(base, derived, {256, 256});
  const double b = s.base.gmacs(), d = s.derived.gmacs();
  const bool ok = std::abs(b - 65) <= 0.15 * 65 && std::abs(d - 42) <= 0.20 * 42 && s.mac_ratio <= 0.75 &&
                  std::abs(s.param_reduction_pct - 12) <= 5;
  return {ok, fmt::format("base {:.2f} GMACs, derived {:.2f} GMACs, ratio {:.3f}, parameters -{:.1f}% ({:.2f} s)", b,
                          d, s.mac_ratio, s.param_reduction_pct, seconds_since(t0))};
}

// ---- 5: decisiveness -------------------------------------------------------

Outcome decisiveness() {
  const auto t0 = std::chrono::steady_clock::now();
  nn::UNetConfig base;
  base.width = 4;
  const auto rosters = search::default_rosters();
  const auto table = cost::build_cost_table(rosters, base, {.resolution = {16, 16}});
  search::Supernet net(base, rosters, nn::InitScheme::kTraining, 5);
  search::TrainConfig c;
  c.epochs = 10;
  c.steps_per_epoch = 20;
  c.batch_size = 2;
  c.beta = 10;
  c.lambda_start = 0.1;
  c.lambda_end = 2;
  c.lr_arch = 0.1;
  c.seed = 5;
  const auto run = search::train_supernet(net, testing::zero_signal_batches(2, 16, 5), table, c);
  bool ok = true;
  double min_max_alpha = 1;
  for (const auto& slot : net.arch().slots()) {
    const auto a = net.arch().alpha_values(slot.stage);
    min_max_alpha = std::min(min_max_alpha, *std::max_element(a.begin(), a.end()));
    const auto pen = table.penalties(slot.stage);
    const auto cheapest = std::min_element(pen.begin(), pen.end()) - pen.begin();
    ok = ok && run.derived.stage(slot.stage) == slot.candidates[static_cast<std::size_t>(cheapest)];
  }
  const double h = run.trace.back().mean_entropy;
  ok = ok && min_max_alpha > 0.9 && h < 0.1;
  return {ok, fmt::format("{} steps, smallest stage max alpha {:.4f}, mean normalized entropy {:.4f}, "
                          "argmin-cost everywhere: {}, {:.1f} s",
                          c.epochs * c.steps_per_epoch, min_max_alpha, h, ok ? "yes" : "see values", seconds_since(t0))};
}

// ---- 6: end-to-end toy search ----------------------------------------------

Outcome toy_search() {
  const auto t0 = std::chrono::steady_clock::now();
  data::DatasetConfig dc;
  dc.patch_size = 32;
  dc.num_patches = 240;
  dc.sigmas = {25};
  dc.seed = 61;
  const auto ds = data::Dataset::make(dc);
  const auto held_out = ds.held_out_pairs({25});

  nn::UNetConfig base;
  base.width = 8;
  const auto rosters = search::truncate_rosters(search::default_rosters(), 2);
  const auto table = cost::build_cost_table(rosters, base, {});
  search::Supernet supernet(base, rosters, nn::InitScheme::kTraining, 61);
  search::TrainConfig tc;
  tc.epochs = 10;
  tc.steps_per_epoch = 40;
  tc.batch_size = 4;
  tc.lr_weights = 2e-3;
  tc.lr_arch = 3e-2;
  tc.seed = 61;
  data::BatchSampler search_batches(ds.train_patches(), tc.batch_size, dc.sigmas, 61);
  const auto run = search::train_supernet(supernet, [&] { return search_batches.next(); }, table, tc);
  const double search_secs = seconds_since(t0);

  search::FinetuneConfig fc;
  fc.epochs = 10;
  fc.steps_per_epoch = 60;
  fc.batch_size = 4;
  fc.lr = 2e-3;
  auto train = [&](const nn::UNetConfig& cfg) {
    nn::Network net = search::inherit_network(supernet, cfg);
    data::BatchSampler b(ds.train_patches(), fc.batch_size, dc.sigmas, 62);
    search::finetune(net, [&] { return b.next(); }, fc);
    return search::evaluate(net, held_out);
  };
  const auto derived = train(run.derived);
  nn::UNetConfig all_alt3 = base;
  for (const auto& r : rosters) {
    if (r.searchable) all_alt3.stage(r.stage) = {BlockKind::kAlt3, 2};
  }
  const auto baseline = train(all_alt3);
  const double secs = seconds_since(t0);

  std::string arch;
  for (const auto& r : rosters) {
    if (r.searchable) arch += fmt::format("{}={} ", nn::stage_name(r.stage), run.derived.stage(r.stage).id());
  }
  const double gain = derived.mean_psnr - derived.mean_noisy_psnr;
  const double margin = derived.mean_psnr - baseline.mean_psnr;
  return {gain >= 2 && margin >= -0.3 && secs <= 1800,
          fmt::format("derived {}| held-out PSNR: noisy {:.2f}, derived {:.2f} (+{:.2f} dB), all-2xAlt3 baseline "
                      "{:.2f} ({:+.2f} dB); search {:.0f} s, total {:.0f} s",
                      arch, derived.mean_noisy_psnr, derived.mean_psnr, gain, baseline.mean_psnr, margin, search_secs,
                      secs)};
}

// ---- 7: Pareto -------------------------------------------------------------

Outcome pareto_correctness() {
  std::mt19937_64 rng(7);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
    const bool coarse = trial % 2 == 0;  // coarse grids force ties
    std::uniform_real_distribution<double> u(0, 100);
    std::vector<cost::ParetoPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
      double q = u(rng), c = u(rng);
      if (coarse) {
        q = std::floor(q / 10);
        c = std::floor(c / 10);
      }
      pts.push_back({q, c, fmt::format("p{}", i)});
    }
    std::vector<cost::ParetoPoint> oracle;
    for (const auto& p : pts) {
      bool dominated = false;
      for (const auto& q : pts) {
        dominated = dominated || ((q.quality >= p.quality && q.cost <= p.cost) &&
                                  (q.quality > p.quality || q.cost < p.cost));
      }
      if (!dominated) oracle.push_back(p);
    }
    auto front = cost::pareto_front(pts);
    auto key = [](const cost::ParetoPoint& a, const cost::ParetoPoint& b) { return a.label < b.label; };
    std::sort(front.begin(), front.end(), key);
    std::sort(oracle.begin(), oracle.end(), key);
    if (front != oracle) ++mismatches;
  }
  std::ifstream in(testing::fixture_path("sidd_models.csv"));
  const auto sidd = cost::read_points_csv(in);
  const auto front = cost::pareto_front(sidd);
  auto on_front = [&](const std::string& label, double q, double c) {
    return std::any_of(front.begin(), front.end(),
                       [&](const auto& p) { return p.label == label && p.quality == q && p.cost == c; });
  };
  const bool ern = on_front("ERN-Net", 43.09, 42), naf = on_front("NAFNet", 43.42, 65);
  std::string labels;
  for (const auto& p : front) labels += p.label + " ";
  return {mismatches == 0 && ern && naf,
          fmt::format("{} oracle mismatches over 1000 sets; reference front: {}", mismatches, labels)};
}

// ---- 8: folding ------------------------------------------------------------

Outcome folding() {
  std::mt19937_64 rng(8);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t cin = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const std::size_t cout = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const std::size_t k = trial % 2 == 0 ? 1 : 3;
    nn::ConvLayer conv = nn::make_conv(cin, cout, k, {.padding = k / 2}, trial % 3 != 0, rng);
    nn::BatchNormLayer bn = nn::make_batch_norm(cout, 1e-5, 0.9);
    nn::ParameterList p;
    conv.collect("conv", p);
    bn.collect("bn", p);
    testing::randomize(p, rng, -2, 2);
    const Tensor x = random_tensor({2, cin, 6, 5}, rng, -3, 3);
    NoGradGuard g;
    const Tensor ref = bn.forward(conv.forward(x), nn::Mode::kEval);
    const Tensor fused = nn::fold_conv_bn(conv, bn).forward(x);
    worst = std::max(worst, testing::max_abs_diff(ref.data(), fused.data()));
  }
  return {worst < 1e-5, fmt::format("max abs deviation {:.2e} over 100 cases", worst)};
}

// ---- 9: determinism --------------------------------------------------------

std::map<std::string, std::string> result_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir);
    if (*rel.begin() == "metadata") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[rel.string()] = s.str();
  }
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt::format("dnas_acceptance_{}", ::getpid());
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string config = (fs::path(DNAS_SOURCE_DIR) / "configs" / "smoke.json").string();
  const std::string points = testing::fixture_path("sidd_models.csv").string();
  std::ostringstream sink;
  std::vector<std::string> failures;
  for (const char* out : {"a", "b"}) {
    const std::string dir = (root / out).string();
    const std::vector<std::vector<std::string>> commands = {
        {"costs", "--config", config, "--output", dir},
        {"search", "--config", config, "--output", dir},
        {"derive", "--config", config, "--output", dir},
        {"finetune", "--config", config, "--output", dir},
        {"eval", "--config", config, "--output", dir},
        {"pareto", "--config", config, "--output", dir, "--points", points}};
    for (auto args : commands) {
      args.insert(args.begin(), "dnas");
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      if (cli::run_cli(static_cast<int>(argv.size()), argv.data(), sink, sink) != 0) failures.push_back(args[1]);
    }
  }
  const auto a = result_files(root / "a"), b = result_files(root / "b");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) {
    if (!b.count(name) || b.at(name) != bytes) ++differing;
  }
  fs::remove_all(root);
  return {failures.empty() && differing == 0 && a.size() == b.size() && a.size() >= 15,
          fmt::format("6 commands run twice, {} result files compared, {} differ{}", a.size(), differing,
                      failures.empty() ? "" : ", failed commands: " + fmt::format("{}", fmt::join(failures, ",")))};
}

}  // namespace
}  // namespace dnas

int main(int argc, char** argv) {
  using dnas::Outcome;
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient suite", dnas::gradient_suite},
      {2, "loss decomposition", dnas::loss_decomposition},
      {3, "derivation from reference encodings", dnas::derivation_oracle},
      {4, "cost-model regression", dnas::cost_regression},
      {5, "decisiveness of penalty-dominated search", dnas::decisiveness},
      {6, "end-to-end toy search", dnas::toy_search},
      {7, "Pareto correctness", dnas::pareto_correctness},
      {8, "conv-BN folding", dnas::folding},
      {9, "determinism of CLI outputs", dnas::determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("criterion {}: {} - {}: {}", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail)
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
