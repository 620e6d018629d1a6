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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "dnas/nn/blocks.hpp"
#include "dnas/nn/param_store.hpp"
#include "dnas/nn/unet.hpp"
#include "support/gradcheck.hpp"
#include "support/nn_helpers.hpp"

namespace dnas::nn {
namespace {

using testing::max_abs_diff;
using testing::random_tensor;
using testing::randomize;

TEST(CandidateSpec, IdRoundTrip) {
  EXPECT_EQ((CandidateSpec{BlockKind::kAlt3, 2}).id(), "2xAlt3");
  EXPECT_EQ(CandidateSpec::parse("12xAlt0"), (CandidateSpec{BlockKind::kAlt0, 12}));
  EXPECT_THROW(CandidateSpec::parse("0xAlt1"), std::invalid_argument);
  EXPECT_THROW(CandidateSpec::parse("xAlt1"), std::invalid_argument);
  EXPECT_THROW(CandidateSpec::parse("2xAlt9"), std::invalid_argument);
  EXPECT_THROW(CandidateSpec::parse("2Alt1"), std::invalid_argument);
}

class EveryKind : public ::testing::TestWithParam<BlockKind> {};

TEST_P(EveryKind, PreservesShape) {
  Rng rng(1);
  std::mt19937_64 data_rng(2);
  auto block = make_block(GetParam(), 8, {}, InitScheme::kTraining, rng);
  randomize(testing::params_of(*block), data_rng);
  Tensor x = random_tensor({1, 8, 16, 16}, data_rng);
  for (Mode mode : {Mode::kTrain, Mode::kEval}) {
    EXPECT_EQ(block->forward(x, mode).shape(), x.shape());
  }
}

TEST_P(EveryKind, IdentityInitIsIdentity) {
  Rng rng(3);
  std::mt19937_64 data_rng(4);
  auto block = make_block(GetParam(), 6, {}, InitScheme::kIdentity, rng);
  Tensor x = random_tensor({2, 6, 8, 8}, data_rng);
  for (Mode mode : {Mode::kTrain, Mode::kEval}) {
    EXPECT_EQ(max_abs_diff(block->forward(x, mode).data(), x.data()), 0.0);
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, EveryKind, ::testing::ValuesIn(kAllBlockKinds),
                         [](const auto& info) { return std::string(block_kind_name(info.param)); });

TEST(NafBlock, TrainingInitIsIdentityUntilProjectionsMove) {
  Rng rng(5);
  std::mt19937_64 data_rng(6);
  NafBlock block(BlockKind::kAlt0, 4, {}, InitScheme::kTraining, rng);
  Tensor x = random_tensor({1, 4, 8, 8}, data_rng);
  EXPECT_EQ(max_abs_diff(block.forward(x, Mode::kTrain).data(), x.data()), 0.0);
  block.project.weight.mutable_data()[0] = 0.5;
  EXPECT_GT(max_abs_diff(block.forward(x, Mode::kTrain).data(), x.data()), 0.0);
}

TEST(NafBlock, Alt1DiffersFromAlt0OnConstantInput) {
  Rng rng(7);
  std::mt19937_64 data_rng(8);
  NafBlock alt0(BlockKind::kAlt0, 4, {}, InitScheme::kTraining, rng);
  randomize(testing::params_of(alt0), data_rng);
  NafBlock alt1(BlockKind::kAlt1, 4, {}, InitScheme::kTraining, rng);
  // Share every weight Alt1 has.
  alt1.expand = alt0.expand;
  alt1.depthwise = alt0.depthwise;
  alt1.attention = alt0.attention;
  alt1.project = alt0.project;
  alt1.ffn_expand = alt0.ffn_expand;
  alt1.ffn_project = alt0.ffn_project;
  EXPECT_FALSE(alt1.norm1.has_value());
  EXPECT_FALSE(alt1.norm2.has_value());
  Tensor x = Tensor::full({1, 4, 4, 4}, 0.7);
  EXPECT_GT(max_abs_diff(alt0.forward(x, Mode::kEval).data(), alt1.forward(x, Mode::kEval).data()),
            1e-3);
}

TEST(NafBlock, UnitAttentionMakesAlt0EqualAlt2) {
  Rng rng(9);
  std::mt19937_64 data_rng(10);
  NafBlock alt0(BlockKind::kAlt0, 4, {}, InitScheme::kTraining, rng);
  randomize(testing::params_of(alt0), data_rng);
  alt0.attention->weight = Tensor::zeros(alt0.attention->weight.shape());
  alt0.attention->bias = Tensor::full(alt0.attention->bias.shape(), 1);
  NafBlock alt2(BlockKind::kAlt2, 4, {}, InitScheme::kTraining, rng);
  EXPECT_FALSE(alt2.attention.has_value());
  alt2.norm1 = alt0.norm1;
  alt2.expand = alt0.expand;
  alt2.depthwise = alt0.depthwise;
  alt2.project = alt0.project;
  alt2.norm2 = alt0.norm2;
  alt2.ffn_expand = alt0.ffn_expand;
  alt2.ffn_project = alt0.ffn_project;
  Tensor x = random_tensor({2, 4, 6, 6}, data_rng);
  EXPECT_LT(max_abs_diff(alt0.forward(x, Mode::kEval).data(), alt2.forward(x, Mode::kEval).data()),
            1e-14);
}

TEST(NafBlock, RejectsOddGateWidth) {
  Rng rng(11);
  BlockOptions opts;
  opts.expand_ratio = 1;
  EXPECT_THROW(NafBlock(BlockKind::kAlt0, 3, opts, InitScheme::kTraining, rng), ShapeError);
}

TEST(NafBlock, GradientMatchesFiniteDifferences) {
  Rng rng(12);
  std::mt19937_64 data_rng(13);
  NafBlock block(BlockKind::kAlt0, 4, {}, InitScheme::kTraining, rng);
  const auto params = testing::params_of(block);
  randomize(params, data_rng);
  Tensor x = random_tensor({1, 4, 5, 5}, data_rng, -1, 1, true);
  std::vector<Tensor> leaves;
  for (const auto& p : params) leaves.push_back(p.tensor);
  std::vector<testing::GradCheckTarget> targets{{&x}};
  for (auto& t : leaves) targets.push_back({&t, testing::sample_indices(t.numel(), 6, data_rng)});
  const double err =
      testing::gradcheck(targets, [&] { return testing::project(block.forward(x, Mode::kEval), 99); });
  EXPECT_LT(err, 1e-4);
}

TEST(ConvBnRelu, MatchesFormulaAndFoldedForm) {
  Rng rng(14);
  std::mt19937_64 data_rng(15);
  BlockOptions opts;
  opts.alt3_kernel = 3;
  ConvBnReluBlock block(5, opts, InitScheme::kTraining, rng);
  randomize(testing::params_of(block), data_rng);
  Tensor x = random_tensor({2, 5, 7, 7}, data_rng);
  const Tensor bn_out = block.bn.forward(block.conv.forward(x), Mode::kEval);
  const Tensor expected = ops::add(x, ops::relu(bn_out));
  EXPECT_LT(max_abs_diff(block.forward(x, Mode::kEval).data(), expected.data()), 1e-14);
  EXPECT_LT(max_abs_diff(block.forward_folded(x).data(), expected.data()), 1e-10);
}

TEST(ConvBnRelu, RejectsEvenKernel) {
  Rng rng(16);
  BlockOptions opts;
  opts.alt3_kernel = 2;
  EXPECT_THROW(ConvBnReluBlock(4, opts, InitScheme::kTraining, rng), std::invalid_argument);
}

TEST(FoldConvBn, NeutralStatisticsLeaveConvUnchanged) {
  Rng rng(17);
  std::mt19937_64 data_rng(18);
  ConvLayer conv = make_conv(3, 4, 3, {.padding = 1}, true, rng);
  BatchNormLayer bn = make_batch_norm(4, 0, 0.9);
  const ConvLayer folded = fold_conv_bn(conv, bn);
  EXPECT_EQ(max_abs_diff(folded.weight.data(), conv.weight.data()), 0.0);
  EXPECT_EQ(max_abs_diff(folded.bias.data(), conv.bias.data()), 0.0);
}

TEST(FoldConvBn, ScalesKernelPerOutputChannel) {
  Rng rng(19);
  std::mt19937_64 data_rng(20);
  ConvLayer conv = make_conv(3, 4, 3, {.padding = 1}, false, rng);
  BatchNormLayer bn = make_batch_norm(4, 1e-5, 0.9);
  nn::ParameterList p;
  bn.collect("bn", p);
  randomize(p, data_rng);
  const ConvLayer folded = fold_conv_bn(conv, bn);
  const std::size_t per_out = 3 * 3 * 3;
  for (std::size_t o = 0; o < 4; ++o) {
    const double k = bn.gamma.data()[o] / std::sqrt(bn.running_var.data()[o] + 1e-5);
    for (std::size_t i = 0; i < per_out; ++i) {
      EXPECT_DOUBLE_EQ(folded.weight.data()[o * per_out + i], conv.weight.data()[o * per_out + i] * k);
    }
    EXPECT_DOUBLE_EQ(folded.bias.data()[o], -bn.running_mean.data()[o] * k + bn.beta.data()[o]);
  }
}

TEST(FoldConvBn, RejectsNonPositiveVariance) {
  Rng rng(21);
  ConvLayer conv = make_conv(2, 2, 1, {}, true, rng);
  BatchNormLayer bn = make_batch_norm(2, 0, 0.9);
  bn.running_var.mutable_data()[1] = 0;
  EXPECT_THROW(fold_conv_bn(conv, bn), std::invalid_argument);
}

TEST(StageNames, RoundTripAndLevels) {
  for (StageId id : kStageOrder) EXPECT_EQ(parse_stage(stage_name(id)), id);
  EXPECT_EQ(stage_level(StageId::kEnc1), 0u);
  EXPECT_EQ(stage_level(StageId::kDec1), 0u);
  EXPECT_EQ(stage_level(StageId::kDec4), 3u);
  EXPECT_EQ(stage_level(StageId::kMid), 4u);
  EXPECT_THROW(parse_stage("enc5"), std::invalid_argument);
}

TEST(UNet, BaseLayout) {
  UNetConfig c;
  const std::vector<std::size_t> counts = {2, 2, 4, 8, 12, 2, 2, 2, 2};
  for (std::size_t i = 0; i < kNumStages; ++i) {
    EXPECT_EQ(c.stages[i].count, counts[i]);
    EXPECT_EQ(c.stages[i].kind, BlockKind::kAlt0);
  }
  c.width = 16;
  EXPECT_EQ(c.stage_channels(StageId::kEnc1), 16u);
  EXPECT_EQ(c.stage_channels(StageId::kEnc3), 64u);
  EXPECT_EQ(c.stage_channels(StageId::kMid), 256u);
  EXPECT_EQ(c.stage_channels(StageId::kDec2), 32u);
}

UNetConfig small_config() {
  UNetConfig c;
  c.width = 4;
  c.stages = {CandidateSpec{BlockKind::kAlt0, 1}, {BlockKind::kAlt3, 2}, {BlockKind::kAlt1, 1},
              {BlockKind::kAlt2, 1},            {BlockKind::kAlt0, 1}, {BlockKind::kAlt3, 1},
              {BlockKind::kAlt2, 1},            {BlockKind::kAlt1, 1}, {BlockKind::kAlt0, 2}};
  return c;
}

TEST(UNet, ShapeRoundTrip) {
  Network net = build_unet(small_config(), InitScheme::kTraining, 1);
  std::mt19937_64 rng(22);
  randomize(net.parameters(), rng, -0.2, 0.2);
  Tensor x = random_tensor({1, 3, 64, 64}, rng, 0, 1);
  EXPECT_EQ(net.forward(x, Mode::kEval).shape(), x.shape());
}

TEST(UNet, IdentityInitReturnsInput) {
  for (InitScheme init : {InitScheme::kIdentity}) {
    Network net = build_unet(small_config(), init, 2);
    std::mt19937_64 rng(23);
    Tensor x = random_tensor({2, 3, 32, 32}, rng, 0, 1);
    EXPECT_EQ(max_abs_diff(net.forward(x, Mode::kTrain).data(), x.data()), 0.0);
    EXPECT_EQ(max_abs_diff(net.forward(x, Mode::kEval).data(), x.data()), 0.0);
  }
}

TEST(UNet, RejectsBadInput) {
  Network net = build_unet(small_config(), InitScheme::kTraining, 3);
  EXPECT_THROW(net.forward(Tensor::zeros({1, 3, 30, 32}), Mode::kEval), ShapeError);
  EXPECT_THROW(net.forward(Tensor::zeros({1, 1, 32, 32}), Mode::kEval), ShapeError);
}

TEST(UNet, ConfigValidation) {
  UNetConfig c;
  c.width = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.width = 3;
  c.block.expand_ratio = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = UNetConfig{};
  c.stage(StageId::kEnc2).count = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(UNet, ParameterNamesAreUniqueAndOrdered) {
  Network net = build_unet(small_config(), InitScheme::kTraining, 4);
  const auto params = net.parameters();
  std::set<std::string> names;
  for (const auto& p : params) EXPECT_TRUE(names.insert(p.name).second) << p.name;
  EXPECT_EQ(params.front().name, "stem.weight");
  EXPECT_EQ(params.back().name, "head.bias");
  EXPECT_TRUE(names.count("enc2.1.bn.running_var"));
  EXPECT_TRUE(names.count("dec4.0.conv.weight"));
  EXPECT_TRUE(names.count("up1.weight"));
  EXPECT_FALSE(names.count("up1.bias"));
}

TEST(UNet, SameSeedSameWeights) {
  Network a = build_unet(small_config(), InitScheme::kTraining, 5);
  Network b = build_unet(small_config(), InitScheme::kTraining, 5);
  const auto pa = a.parameters(), pb = b.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(max_abs_diff(pa[i].tensor.data(), pb[i].tensor.data()), 0.0);
  }
}

TEST(ParamStore, BitExactRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "dnas_param_store_test";
  std::filesystem::remove_all(dir);
  Network net = build_unet(small_config(), InitScheme::kTraining, 6);
  std::mt19937_64 rng(24);
  randomize(net.parameters(), rng);
  save_params(dir / "net.bin", net.parameters(), {{"config", config_to_json(net.config())}});

  const ParamFile file = load_params(dir / "net.bin");
  EXPECT_EQ(config_from_json(file.attributes.at("config")), net.config());
  Network other = build_unet(small_config(), InitScheme::kTraining, 7);
  EXPECT_EQ(assign_params(other.parameters(), file.tensors), net.parameters().size());
  const auto pa = net.parameters(), pb = other.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const auto a = pa[i].tensor.data(), b = pb[i].tensor.data();
    EXPECT_EQ(0, std::memcmp(a.data(), b.data(), a.size() * sizeof(real_t))) << pa[i].name;
    EXPECT_EQ(file.tensors.at(pa[i].name).requires_grad(), pa[i].trainable);
  }
  // Re-saving the reloaded values reproduces the file byte for byte.
  save_params(dir / "again.bin", other.parameters(), file.attributes);
  std::ifstream f1(dir / "net.bin", std::ios::binary), f2(dir / "again.bin", std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  EXPECT_EQ(s1, s2);
  std::filesystem::remove_all(dir);
}

TEST(ParamStore, AssignReportsMissingAndMismatched) {
  Network net = build_unet(small_config(), InitScheme::kTraining, 8);
  std::map<std::string, Tensor> src;
  EXPECT_THROW(assign_params(net.parameters(), src), std::runtime_error);
  for (const auto& p : net.parameters()) src.emplace(p.name, p.tensor.clone());
  src["stem.bias"] = Tensor::zeros({2});
  EXPECT_THROW(assign_params(net.parameters(), src), ShapeError);
}

TEST(ParamStore, RejectsForeignFile) {
  const auto path = std::filesystem::temp_directory_path() / "dnas_not_params.bin";
  std::ofstream(path) << "hello world, definitely not a container";
  EXPECT_THROW(load_params(path), std::runtime_error);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace dnas::nn
