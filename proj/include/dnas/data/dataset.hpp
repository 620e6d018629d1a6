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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dnas/tensor/tensor.hpp"

namespace dnas::data {

enum class Source { kProcedural, kDirectory };

struct DatasetConfig {
  Source source = Source::kProcedural;
  std::string directory;      // PNG folder for Source::kDirectory
  std::size_t patch_size = 32;  // multiple of 16
  std::size_t num_patches = 256;
  std::size_t channels = 3;     // procedural only; directory images are RGB
  std::vector<double> sigmas{25.0};  // 0-255 scale
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One clean/noisy pair; tensors are [C,H,W] in [0,1].
struct ImagePair {
  Tensor clean;
  Tensor noisy;
  double sigma = 0;
  std::size_t image = 0;  // patch index in the dataset
};

/// Batched pairs: [N,C,H,W] each.
struct Batch {
  Tensor clean;
  Tensor noisy;
};

/// Structured clean patches (gradients, checkers, disks, smoothed noise
/// textures), each with a per-patch standard deviation above 0.05.
std::vector<Tensor> procedural_patches(std::size_t count, std::size_t channels, std::size_t size,
                                       std::uint64_t seed);

/// Random crops from every *.png in `directory` (sorted by name, crops
/// distributed round-robin). Unreadable or too-small files are all listed
/// in the thrown error.
std::vector<Tensor> directory_patches(const std::string& directory, std::size_t count,
                                      std::size_t size, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> held_out;
};

/// Seed-deterministic disjoint, exhaustive split; train gets
/// round(fraction * n) indices.
Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

/// Clean patches plus their split.
class Dataset {
 public:
  static Dataset make(const DatasetConfig& config);

  const DatasetConfig& config() const { return config_; }
  const std::vector<Tensor>& patches() const { return patches_; }
  const Split& split() const { return split_; }

  std::vector<Tensor> train_patches() const;
  std::vector<Tensor> held_out_patches() const;

  /// Deterministic noisy versions of the held-out patches: one pair per
  /// (patch, sigma), noise seeded by (dataset seed, patch index, sigma).
  std::vector<ImagePair> held_out_pairs(const std::vector<double>& sigmas) const;

 private:
  DatasetConfig config_;
  std::vector<Tensor> patches_;
  Split split_;
};

/// Endless reshuffling minibatch stream over a set of clean patches; each
/// sample gets fresh noise at a sigma drawn from `sigmas`.
class BatchSampler {
 public:
  BatchSampler(std::vector<Tensor> patches, std::size_t batch_size, std::vector<double> sigmas,
               std::uint64_t seed);
  Batch next();

 private:
  std::vector<Tensor> patches_;
  std::size_t batch_size_;
  std::vector<double> sigmas_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Stacks same-shape [C,H,W] tensors into [N,C,H,W].
Tensor stack(const std::vector<Tensor>& images);
/// Splits [N,C,H,W] into N tensors of [C,H,W].
std::vector<Tensor> unstack(const Tensor& batch);

}  // namespace dnas::data
