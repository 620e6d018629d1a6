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
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dnas/data/dataset.hpp"
#include "dnas/data/metrics.hpp"
#include "dnas/data/noise.hpp"
#include "dnas/data/png_io.hpp"
#include "support/oracles.hpp"

namespace dnas::data {
namespace {

using testing::random_tensor;

double mean_of(std::span<const real_t> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(std::span<const real_t> v) {
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

TEST(Noise, ZeroSigmaIsIdentity) {
  std::mt19937_64 rng(1);
  Tensor x = random_tensor({3, 8, 8}, rng, 0, 1);
  EXPECT_EQ(testing::max_abs_diff(add_gaussian_noise(x, 0, 5).data(), x.data()), 0.0);
}

TEST(Noise, EmpiricalStdMatchesSigma) {
  const Tensor noise = gaussian_noise({1, 512, 512}, 25, 7);
  EXPECT_NEAR(std_of(noise.data()), 25.0 / 255.0, 0.02 * 25.0 / 255.0);
  // Through the clipped path on a mid-grey image clipping is negligible.
  const Tensor flat = Tensor::full({1, 512, 512}, 0.5);
  const Tensor noisy = add_gaussian_noise(flat, 25, 7);
  std::vector<real_t> diff(flat.numel());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = noisy.data()[i] - 0.5;
  EXPECT_NEAR(std_of(diff), 25.0 / 255.0, 0.02 * 25.0 / 255.0);
}

TEST(Noise, DeterministicClippedAndIndependent) {
  std::mt19937_64 rng(2);
  Tensor x = random_tensor({3, 64, 64}, rng, 0, 1);
  const Tensor a = add_gaussian_noise(x, 50, 11), b = add_gaussian_noise(x, 50, 11);
  EXPECT_EQ(testing::max_abs_diff(a.data(), b.data()), 0.0);
  EXPECT_EQ(a.shape(), x.shape());
  for (double v : a.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const Tensor n1 = gaussian_noise({1, 256, 256}, 25, 100), n2 = gaussian_noise({1, 256, 256}, 25, 101);
  double dot = 0;
  for (std::size_t i = 0; i < n1.numel(); ++i) dot += n1.data()[i] * n2.data()[i];
  const double corr = dot / (static_cast<double>(n1.numel()) * std_of(n1.data()) * std_of(n2.data()));
  EXPECT_LT(std::abs(corr), 0.05);
  EXPECT_THROW(add_gaussian_noise(x, -1, 0), std::invalid_argument);
}

TEST(Psnr, Examples) {
  std::mt19937_64 rng(3);
  Tensor a = random_tensor({3, 10, 10}, rng, 0, 1);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_GT(psnr(a, a), 0);
  Tensor z = Tensor::zeros({4, 5}), t = Tensor::full({4, 5}, 0.1);
  EXPECT_NEAR(psnr(z, t), 20.0, 1e-9);
  Tensor b = random_tensor({3, 10, 10}, rng, 0, 1);
  double sse = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) sse += std::pow(a.data()[i] - b.data()[i], 2);
  const double oracle = 10 * std::log10(1.0 / (sse / 300));
  EXPECT_NEAR(psnr(a, b), oracle, 1e-9);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  EXPECT_NEAR(psnr(a, b, 255.0), oracle + 20 * std::log10(255.0), 1e-9);
  EXPECT_THROW(psnr(a, Tensor::zeros({3, 10, 9})), ShapeError);
}

// Direct sliding-window SSIM: explicit 2-D Gaussian weights and weighted
// moments per window, no separability.
double ssim_oracle(const Tensor& a, const Tensor& b) {
  const std::size_t C = a.dim(0), H = a.dim(1), W = a.dim(2), n = 11;
  double wsum = 0;
  std::vector<double> w(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double di = double(i) - 5, dj = double(j) - 5;
      w[i * n + j] = std::exp(-(di * di + dj * dj) / (2 * 1.5 * 1.5));
      wsum += w[i * n + j];
    }
  }
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t y = 0; y + n <= H; ++y) {
      for (std::size_t x = 0; x + n <= W; ++x) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double k = w[i * n + j] / wsum;
            mx += k * a.data()[(c * H + y + i) * W + x + j];
            my += k * b.data()[(c * H + y + i) * W + x + j];
          }
        }
        double vx = 0, vy = 0, cov = 0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double k = w[i * n + j] / wsum;
            const double dx = a.data()[(c * H + y + i) * W + x + j] - mx;
            const double dy = b.data()[(c * H + y + i) * W + x + j] - my;
            vx += k * dx * dx;
            vy += k * dy * dy;
            cov += k * dx * dy;
          }
        }
        total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    }
  }
  return total / double(count);
}

TEST(Ssim, IdenticalIsExactlyOne) {
  const auto patches = procedural_patches(2, 3, 32, 4);
  EXPECT_EQ(ssim(patches[0], patches[0]), 1.0);
  EXPECT_EQ(ssim(stack(patches), stack(patches)), 1.0);
}

TEST(Ssim, NegativeImageScoresBelowOne) {
  const Tensor a = procedural_patches(1, 3, 32, 5)[0];
  std::vector<real_t> inv(a.numel());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1 - a.data()[i];
  const double s = ssim(a, Tensor(a.shape(), inv));
  EXPECT_LT(s, 1.0);
  EXPECT_GE(s, -1.0);
}

TEST(Ssim, MatchesSlidingWindowOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    Tensor a = random_tensor({2, 17, 14}, rng, 0, 1);
    Tensor b = add_gaussian_noise(a, 30, trial);
    EXPECT_NEAR(ssim(a, b), ssim_oracle(a, b), 1e-6);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
  }
}

TEST(Ssim, RejectsSmallImages) {
  EXPECT_THROW(ssim(Tensor::zeros({1, 10, 20}), Tensor::zeros({1, 10, 20})), std::invalid_argument);
  EXPECT_THROW(ssim(Tensor::zeros({10, 20}), Tensor::zeros({10, 20})), ShapeError);
}

TEST(Dataset, SplitIsDisjointAndExhaustive) {
  const Split s = split_indices(100, 0.8, 3);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.held_out.size(), 20u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (std::size_t i : s.held_out) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 100u);
  const Split again = split_indices(100, 0.8, 3);
  EXPECT_EQ(again.train, s.train);
  EXPECT_NE(split_indices(100, 0.8, 4).train, s.train);
}

TEST(Dataset, ProceduralPatchesAreDeterministicAndStructured) {
  DatasetConfig cfg;
  cfg.num_patches = 40;
  cfg.seed = 9;
  const Dataset a = Dataset::make(cfg), b = Dataset::make(cfg);
  ASSERT_EQ(a.patches().size(), 40u);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(testing::max_abs_diff(a.patches()[i].data(), b.patches()[i].data()), 0.0);
    EXPECT_GT(std_of(a.patches()[i].data()), 0.05);
    EXPECT_EQ(a.patches()[i].shape(), (Shape{3, 32, 32}));
    for (double v : a.patches()[i].data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(a.train_patches().size(), 32u);
  const auto pairs = a.held_out_pairs({15, 50});
  EXPECT_EQ(pairs.size(), 16u);
  const auto again = b.held_out_pairs({15, 50});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(testing::max_abs_diff(pairs[i].noisy.data(), again[i].noisy.data()), 0.0);
  }
  EXPECT_GT(psnr(pairs[0].clean, pairs[0].noisy), psnr(pairs[1].clean, pairs[1].noisy));
}

TEST(Dataset, ConfigValidation) {
  DatasetConfig cfg;
  cfg.patch_size = 30;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.train_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.sigmas = {-3};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.source = Source::kDirectory;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(BatchSampler, DeterministicBatches) {
  const auto patches = procedural_patches(5, 3, 16, 1);
  BatchSampler s1(patches, 3, {10, 25}, 42), s2(patches, 3, {10, 25}, 42);
  for (int i = 0; i < 4; ++i) {
    const Batch a = s1.next(), b = s2.next();
    EXPECT_EQ(a.clean.shape(), (Shape{3, 3, 16, 16}));
    EXPECT_EQ(testing::max_abs_diff(a.noisy.data(), b.noisy.data()), 0.0);
    EXPECT_EQ(testing::max_abs_diff(a.clean.data(), b.clean.data()), 0.0);
  }
  EXPECT_THROW(BatchSampler({}, 1, {25}, 0), std::invalid_argument);
}

TEST(Stack, RoundTrip) {
  std::mt19937_64 rng(8);
  std::vector<Tensor> xs{random_tensor({2, 3, 4}, rng), random_tensor({2, 3, 4}, rng)};
  const auto back = unstack(stack(xs));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(testing::max_abs_diff(back[1].data(), xs[1].data()), 0.0);
  EXPECT_THROW(stack({xs[0], Tensor::zeros({2, 3, 5})}), ShapeError);
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

TEST(Png, RoundTripIsExactOnEightBitValues) {
  TempDir dir("dnas_png_test");
  std::mt19937_64 rng(12);
  std::vector<real_t> v(3 * 9 * 13);
  for (auto& x : v) x = static_cast<real_t>(rng() % 256) / 255;
  const Tensor img({3, 9, 13}, v);
  write_png(dir.path() / "a.png", img);
  const Tensor back = read_png(dir.path() / "a.png");
  EXPECT_EQ(back.shape(), img.shape());
  EXPECT_LT(testing::max_abs_diff(back.data(), img.data()), 1e-12);
  EXPECT_THROW(read_png(dir.path() / "missing.png"), std::runtime_error);
}

TEST(Dataset, DirectoryModeCropsAndReportsBadFiles) {
  TempDir dir("dnas_dir_dataset_test");
  const auto imgs = procedural_patches(2, 3, 48, 3);
  write_png(dir.path() / "b.png", imgs[0]);
  write_png(dir.path() / "a.png", imgs[1]);
  DatasetConfig cfg;
  cfg.source = Source::kDirectory;
  cfg.directory = dir.path().string();
  cfg.patch_size = 16;
  cfg.num_patches = 10;
  const Dataset ds = Dataset::make(cfg);
  EXPECT_EQ(ds.patches().size(), 10u);
  EXPECT_EQ(ds.patches()[0].shape(), (Shape{3, 16, 16}));
  const Dataset again = Dataset::make(cfg);
  EXPECT_EQ(testing::max_abs_diff(ds.patches()[7].data(), again.patches()[7].data()), 0.0);

  std::ofstream(dir.path() / "c.png") << "not a png";
  write_png(dir.path() / "d.png", Tensor::zeros({3, 8, 8}));
  try {
    Dataset::make(cfg);
    FAIL();
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("c.png"), std::string::npos);
    EXPECT_NE(msg.find("d.png"), std::string::npos);
    EXPECT_NE(msg.find("2 image(s)"), std::string::npos);
  }
  cfg.directory = (dir.path() / "nope").string();
  EXPECT_THROW(Dataset::make(cfg), std::runtime_error);
}

}  // namespace
}  // namespace dnas::data
