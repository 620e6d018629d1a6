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

#include "dnas/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <fmt/format.h>

#include "dnas/data/noise.hpp"
#include "dnas/data/png_io.hpp"

namespace dnas::data {

namespace {

using Plane = std::vector<double>;

// splitmix64 finalizer over a combined key.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double plane_std(const std::vector<real_t>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

// Pattern value in [0,1] at (y, x) for one of the generators.
struct Pattern {
  int kind;
  double a, b, c, d, e;
};

Pattern random_pattern(std::mt19937_64& rng, double size) {
  std::uniform_real_distribution<double> u(0, 1);
  const int kind = static_cast<int>(rng() % 4);
  return {kind, u(rng) * 2 * std::numbers::pi, size * (0.15 + 0.35 * u(rng)), u(rng) * size,
          u(rng) * size, size * (0.15 + 0.3 * u(rng))};
}

// Smooth texture: a coarse random grid bilinearly upsampled.
Plane smooth_texture(std::mt19937_64& rng, std::size_t size) {
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t g = 2 + rng() % 4;
  std::vector<double> grid((g + 1) * (g + 1));
  for (auto& v : grid) v = u(rng);
  Plane out(size * size);
  const double scale = static_cast<double>(g) / static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double fy = static_cast<double>(y) * scale, fx = static_cast<double>(x) * scale;
      const auto iy = static_cast<std::size_t>(fy), ix = static_cast<std::size_t>(fx);
      const double ty = fy - static_cast<double>(iy), tx = fx - static_cast<double>(ix);
      const double v00 = grid[iy * (g + 1) + ix], v01 = grid[iy * (g + 1) + ix + 1];
      const double v10 = grid[(iy + 1) * (g + 1) + ix], v11 = grid[(iy + 1) * (g + 1) + ix + 1];
      out[y * size + x] = (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
    }
  }
  return out;
}

Plane render(const Pattern& p, std::mt19937_64& rng, std::size_t size) {
  if (p.kind == 3) return smooth_texture(rng, size);
  Plane out(size * size);
  const double ca = std::cos(p.a), sa = std::sin(p.a);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double fy = static_cast<double>(y), fx = static_cast<double>(x);
      const double u = ca * fx + sa * fy, v = -sa * fx + ca * fy;
      double val = 0;
      switch (p.kind) {
        case 0:  // linear gradient
          val = 0.5 + 0.5 * std::sin(u / p.b);
          break;
        case 1:  // rotated checkerboard
          val = (static_cast<long>(std::floor(u / p.b * 2)) + static_cast<long>(std::floor(v / p.b * 2))) % 2 == 0
                    ? 1.0
                    : 0.0;
          break;
        default: {  // disk
          const double dy = fy - p.d, dx = fx - p.c;
          val = dy * dy + dx * dx < p.e * p.e ? 1.0 : 0.0;
        }
      }
      out[y * size + x] = val;
    }
  }
  return out;
}

Tensor procedural_patch(std::mt19937_64& rng, std::size_t channels, std::size_t size) {
  std::uniform_real_distribution<double> u(0, 1);
  // Blend two or three layers; each channel mixes them with its own gains.
  const std::size_t layers = 2 + rng() % 2;
  std::vector<Plane> planes;
  for (std::size_t l = 0; l < layers; ++l) {
    planes.push_back(render(random_pattern(rng, static_cast<double>(size)), rng, size));
  }
  std::vector<real_t> v(channels * size * size);
  for (std::size_t c = 0; c < channels; ++c) {
    const double base = 0.1 + 0.3 * u(rng);
    std::vector<double> gain(layers);
    for (auto& g : gain) g = (0.2 + 0.6 * u(rng)) / static_cast<double>(layers) * 1.5;
    for (std::size_t i = 0; i < size * size; ++i) {
      double s = base;
      for (std::size_t l = 0; l < layers; ++l) s += gain[l] * (planes[l][i] - 0.5);
      v[c * size * size + i] = static_cast<real_t>(std::clamp(s + 0.25, 0.0, 1.0));
    }
  }
  return Tensor({channels, size, size}, std::move(v));
}

}  // namespace

void DatasetConfig::validate() const {
  if (patch_size == 0 || patch_size % 16 != 0) {
    throw std::invalid_argument(fmt::format("patch_size {} must be a positive multiple of 16", patch_size));
  }
  if (num_patches < 2) throw std::invalid_argument("num_patches must be at least 2");
  if (channels == 0) throw std::invalid_argument("channels must be positive");
  if (source == Source::kDirectory && channels != 3) {
    throw std::invalid_argument("directory datasets are RGB; channels must be 3");
  }
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw std::invalid_argument(fmt::format("train_fraction must lie in (0, 1), got {}", train_fraction));
  }
  if (sigmas.empty()) throw std::invalid_argument("sigmas must not be empty");
  for (double s : sigmas) {
    if (!(s >= 0) || !std::isfinite(s)) throw std::invalid_argument(fmt::format("invalid sigma {}", s));
  }
  if (source == Source::kDirectory && directory.empty()) {
    throw std::invalid_argument("directory source needs a directory");
  }
}

std::vector<Tensor> procedural_patches(std::size_t count, std::size_t channels, std::size_t size,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Tensor> out;
  out.reserve(count);
  while (out.size() < count) {
    Tensor t = procedural_patch(rng, channels, size);
    const auto d = t.data();
    if (plane_std(std::vector<real_t>(d.begin(), d.end())) > 0.05) out.push_back(std::move(t));
  }
  return out;
}

std::vector<Tensor> directory_patches(const std::string& directory, std::size_t count,
                                      std::size_t size, std::uint64_t seed) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw std::runtime_error(fmt::format("image directory '{}' is not readable", directory));
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(directory)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error(fmt::format("no .png files in '{}'", directory));

  std::vector<Tensor> images;
  std::vector<std::string> errors;
  for (const auto& f : files) {
    try {
      Tensor img = read_png(f);
      if (img.dim(1) < size || img.dim(2) < size) {
        errors.push_back(fmt::format("{}: {}x{} is smaller than patch size {}", f.string(), img.dim(1),
                                     img.dim(2), size));
      } else {
        images.push_back(std::move(img));
      }
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = fmt::format("{} image(s) in '{}' could not be used:", errors.size(), directory);
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  std::mt19937_64 rng(seed);
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < count; ++i) {
    const Tensor& img = images[i % images.size()];
    const std::size_t h = img.dim(1), w = img.dim(2);
    const std::size_t y0 = rng() % (h - size + 1), x0 = rng() % (w - size + 1);
    std::vector<real_t> v(3 * size * size);
    const auto d = img.data();
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < size; ++y) {
        std::copy_n(d.begin() + static_cast<std::ptrdiff_t>((c * h + y0 + y) * w + x0), size,
                    v.begin() + static_cast<std::ptrdiff_t>((c * size + y) * size));
      }
    }
    out.emplace_back(Shape{3, size, size}, std::move(v));
  }
  return out;
}

Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed ^ 0x5EEDu);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.held_out.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.held_out.begin(), s.held_out.end());
  return s;
}

Dataset Dataset::make(const DatasetConfig& config) {
  config.validate();
  Dataset ds;
  ds.config_ = config;
  ds.patches_ = config.source == Source::kProcedural
                    ? procedural_patches(config.num_patches, config.channels, config.patch_size, config.seed)
                    : directory_patches(config.directory, config.num_patches, config.patch_size, config.seed);
  ds.split_ = split_indices(ds.patches_.size(), config.train_fraction, config.seed);
  if (ds.split_.train.empty() || ds.split_.held_out.empty()) {
    throw std::invalid_argument("train_fraction leaves an empty split");
  }
  return ds;
}

std::vector<Tensor> Dataset::train_patches() const {
  std::vector<Tensor> out;
  for (std::size_t i : split_.train) out.push_back(patches_[i]);
  return out;
}

std::vector<Tensor> Dataset::held_out_patches() const {
  std::vector<Tensor> out;
  for (std::size_t i : split_.held_out) out.push_back(patches_[i]);
  return out;
}

std::vector<ImagePair> Dataset::held_out_pairs(const std::vector<double>& sigmas) const {
  std::vector<ImagePair> out;
  for (std::size_t i : split_.held_out) {
    for (double s : sigmas) {
      const std::uint64_t seed =
          mix_seed(mix_seed(config_.seed, i), static_cast<std::uint64_t>(std::llround(s * 1000)));
      out.push_back({patches_[i], add_gaussian_noise(patches_[i], s, seed), s, i});
    }
  }
  return out;
}

BatchSampler::BatchSampler(std::vector<Tensor> patches, std::size_t batch_size,
                           std::vector<double> sigmas, std::uint64_t seed)
    : patches_(std::move(patches)), batch_size_(batch_size), sigmas_(std::move(sigmas)), rng_(seed) {
  if (patches_.empty()) throw std::invalid_argument("BatchSampler needs at least one patch");
  if (batch_size_ == 0) throw std::invalid_argument("batch size must be positive");
  if (sigmas_.empty()) throw std::invalid_argument("BatchSampler needs at least one sigma");
  order_.resize(patches_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  std::shuffle(order_.begin(), order_.end(), rng_);
}

Batch BatchSampler::next() {
  std::vector<Tensor> clean, noisy;
  for (std::size_t b = 0; b < batch_size_; ++b) {
    if (cursor_ == order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    const Tensor& p = patches_[order_[cursor_++]];
    const double sigma = sigmas_[rng_() % sigmas_.size()];
    clean.push_back(p);
    noisy.push_back(add_gaussian_noise(p, sigma, rng_()));
  }
  return {stack(clean), stack(noisy)};
}

Tensor stack(const std::vector<Tensor>& images) {
  if (images.empty()) throw std::invalid_argument("stack of zero images");
  const Shape s = images.front().shape();
  std::vector<real_t> v;
  v.reserve(images.size() * shape_numel(s));
  for (const auto& im : images) {
    if (im.shape() != s) {
      throw ShapeError(fmt::format("stack: {} vs {}", shape_to_string(im.shape()), shape_to_string(s)));
    }
    const auto d = im.data();
    v.insert(v.end(), d.begin(), d.end());
  }
  Shape out{images.size()};
  out.insert(out.end(), s.begin(), s.end());
  return Tensor(std::move(out), std::move(v));
}

std::vector<Tensor> unstack(const Tensor& batch) {
  if (batch.rank() < 2) throw ShapeError("unstack needs rank >= 2");
  const Shape s(batch.shape().begin() + 1, batch.shape().end());
  const std::size_t n = shape_numel(s);
  const auto d = batch.data();
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < batch.dim(0); ++i) {
    out.emplace_back(s, std::vector<real_t>(d.begin() + static_cast<std::ptrdiff_t>(i * n),
                                            d.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
  }
  return out;
}

}  // namespace dnas::data
