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

#include "dnas/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include <Eigen/Core>
#include <fmt/format.h>

namespace dnas::ops {

using detail::make_result;
using detail::Node;

namespace {

// Gradient buffer of input `i`, or nullptr when that input is a constant.
real_t* grad_ptr(Node& node, std::size_t i) {
  Node& in = *node.inputs[i];
  return in.requires_grad ? in.grad.data() : nullptr;
}

const real_t* data_ptr(Node& node, std::size_t i) {
  return node.inputs[i]->data.data();
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(fmt::format("{} must have rank {}, got shape {}", what,
                                 rank, shape_to_string(t.shape())));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != sb.size()) {
    throw ShapeError(fmt::format("{}: rank mismatch {} vs {}", op,
                                 shape_to_string(sa), shape_to_string(sb)));
  }
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i] != sb[i]) {
      throw ShapeError(fmt::format("{}: dimension {} differs ({} vs {})", op,
                                   i, sa[i], sb[i]));
    }
  }
}

// Output positions o in [lo, hi) whose input index o*stride + offset lies in
// [0, extent).
struct Span1d {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

Span1d valid_outputs(long offset, std::size_t stride, std::size_t extent,
                     std::size_t out_extent) {
  const long s = static_cast<long>(stride);
  long lo = 0;
  if (offset < 0) lo = (-offset + s - 1) / s;
  const long last = static_cast<long>(extent) - 1 - offset;
  if (last < 0) return {};
  long hi = std::min<long>(static_cast<long>(out_extent), last / s + 1);
  if (hi <= lo) return {};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

struct ConvGeometry {
  std::size_t n, c, h, w;      // input
  std::size_t o, kh, kw;       // kernel
  std::size_t oh, ow;          // output
  std::size_t stride, padding, groups;
  std::size_t cg() const { return c / groups; }
  std::size_t og() const { return o / groups; }
  bool pointwise() const {
    return kh == 1 && kw == 1 && stride == 1 && padding == 0;
  }
};

// Visits every (input row, output row, kernel tap) triple of one
// (input plane, output plane) pair. `fn(in_row, out_row, tap, ow_lo, ow_hi,
// iw_off)` handles the contiguous run along W.
template <typename Fn>
void for_each_tap(const ConvGeometry& g, Fn&& fn) {
  const long pad = static_cast<long>(g.padding);
  for (std::size_t ky = 0; ky < g.kh; ++ky) {
    const Span1d rows =
        valid_outputs(static_cast<long>(ky) - pad, g.stride, g.h, g.oh);
    for (std::size_t kx = 0; kx < g.kw; ++kx) {
      const long x_off = static_cast<long>(kx) - pad;
      const Span1d cols = valid_outputs(x_off, g.stride, g.w, g.ow);
      if (cols.lo >= cols.hi) continue;
      for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
        const std::size_t iy = oy * g.stride + ky - g.padding;
        fn(iy, oy, ky * g.kw + kx, cols.lo, cols.hi, x_off);
      }
    }
  }
}

void conv_forward(const ConvGeometry& g, const real_t* in, const real_t* k,
                  const real_t* bias, real_t* out) {
  const std::size_t in_plane = g.h * g.w;
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t taps = g.kh * g.kw;
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t oc = 0; oc < g.o; ++oc) {
      real_t* dst = out + (n * g.o + oc) * out_plane;
      std::fill(dst, dst + out_plane, bias ? bias[oc] : real_t{0});
      const std::size_t grp = oc / g.og();
      for (std::size_t icg = 0; icg < g.cg(); ++icg) {
        const std::size_t ic = grp * g.cg() + icg;
        const real_t* src = in + (n * g.c + ic) * in_plane;
        const real_t* kern = k + (oc * g.cg() + icg) * taps;
        if (g.pointwise()) {
          const real_t wv = kern[0];
          for (std::size_t p = 0; p < out_plane; ++p) dst[p] += wv * src[p];
          continue;
        }
        for_each_tap(g, [&](std::size_t iy, std::size_t oy, std::size_t tap,
                            std::size_t lo, std::size_t hi, long x_off) {
          const real_t wv = kern[tap];
          real_t* drow = dst + oy * g.ow;
          const real_t* srow = src + iy * g.w;
          if (g.stride == 1) {
            const real_t* s0 = srow + (static_cast<long>(lo) + x_off);
            real_t* d0 = drow + lo;
            for (std::size_t i = 0; i < hi - lo; ++i) d0[i] += wv * s0[i];
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) {
              drow[ox] += wv * srow[ox * g.stride + x_off];
            }
          }
        });
      }
    }
  }
}

void conv_backward(const ConvGeometry& g, const real_t* in, const real_t* k,
                   const real_t* gout, real_t* gin, real_t* gk, real_t* gb) {
  const std::size_t in_plane = g.h * g.w;
  const std::size_t out_plane = g.oh * g.ow;
  const std::size_t taps = g.kh * g.kw;
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t oc = 0; oc < g.o; ++oc) {
      const real_t* go = gout + (n * g.o + oc) * out_plane;
      if (gb) {
        real_t acc = 0;
        for (std::size_t p = 0; p < out_plane; ++p) acc += go[p];
        gb[oc] += acc;
      }
      if (!gin && !gk) continue;
      const std::size_t grp = oc / g.og();
      for (std::size_t icg = 0; icg < g.cg(); ++icg) {
        const std::size_t ic = grp * g.cg() + icg;
        const real_t* src = in + (n * g.c + ic) * in_plane;
        real_t* gsrc = gin ? gin + (n * g.c + ic) * in_plane : nullptr;
        const std::size_t kbase = (oc * g.cg() + icg) * taps;
        if (g.pointwise()) {
          const real_t wv = k[kbase];
          if (gsrc) {
            for (std::size_t p = 0; p < out_plane; ++p) gsrc[p] += wv * go[p];
          }
          if (gk) {
            real_t acc = 0;
            for (std::size_t p = 0; p < out_plane; ++p) acc += go[p] * src[p];
            gk[kbase] += acc;
          }
          continue;
        }
        for_each_tap(g, [&](std::size_t iy, std::size_t oy, std::size_t tap,
                            std::size_t lo, std::size_t hi, long x_off) {
          const real_t* grow = go + oy * g.ow;
          const real_t* srow = src + iy * g.w;
          const real_t wv = k[kbase + tap];
          real_t acc = 0;
          if (g.stride == 1) {
            const long first = static_cast<long>(lo) + x_off;
            const real_t* s0 = srow + first;
            const real_t* g1 = grow + lo;
            const std::size_t len = hi - lo;
            if (gsrc) {
              real_t* g0 = gsrc + iy * g.w + first;
              for (std::size_t i = 0; i < len; ++i) g0[i] += wv * g1[i];
            }
            if (gk) {
              for (std::size_t i = 0; i < len; ++i) acc += g1[i] * s0[i];
            }
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) {
              const std::size_t ix = ox * g.stride + x_off;
              if (gsrc) gsrc[iy * g.w + ix] += wv * grow[ox];
              acc += grow[ox] * srow[ix];
            }
          }
          if (gk) gk[kbase + tap] += acc;
        });
      }
    }
  }
}

// Dense (groups == 1) convolution as a GEMM over an im2col buffer: row
// (c, ky, kx) of `col` holds the input sample each output position reads
// through that tap (zero where it falls in the padding).
using RowMatrix = Eigen::Matrix<real_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

void im2col(const ConvGeometry& g, const real_t* src, real_t* col) {
  const std::size_t taps = g.kh * g.kw;
  const std::size_t out_plane = g.oh * g.ow;
  std::fill(col, col + g.c * taps * out_plane, real_t{0});
  for (std::size_t c = 0; c < g.c; ++c) {
    const real_t* plane = src + c * g.h * g.w;
    for_each_tap(g, [&](std::size_t iy, std::size_t oy, std::size_t tap, std::size_t lo,
                        std::size_t hi, long x_off) {
      real_t* row = col + (c * taps + tap) * out_plane + oy * g.ow;
      const real_t* srow = plane + iy * g.w;
      for (std::size_t ox = lo; ox < hi; ++ox) {
        row[ox] = srow[static_cast<long>(ox * g.stride) + x_off];
      }
    });
  }
}

void col2im_add(const ConvGeometry& g, const real_t* col, real_t* dst) {
  const std::size_t taps = g.kh * g.kw;
  const std::size_t out_plane = g.oh * g.ow;
  for (std::size_t c = 0; c < g.c; ++c) {
    real_t* plane = dst + c * g.h * g.w;
    for_each_tap(g, [&](std::size_t iy, std::size_t oy, std::size_t tap, std::size_t lo,
                        std::size_t hi, long x_off) {
      const real_t* row = col + (c * taps + tap) * out_plane + oy * g.ow;
      real_t* drow = plane + iy * g.w;
      for (std::size_t ox = lo; ox < hi; ++ox) {
        drow[static_cast<long>(ox * g.stride) + x_off] += row[ox];
      }
    });
  }
}

void dense_conv_forward(const ConvGeometry& g, const real_t* in, const real_t* k,
                        const real_t* bias, real_t* out) {
  const auto rows = static_cast<Eigen::Index>(g.c * g.kh * g.kw);
  const auto cols = static_cast<Eigen::Index>(g.oh * g.ow);
  const auto outs = static_cast<Eigen::Index>(g.o);
  ConstMatrixMap w(k, outs, rows);
  std::vector<real_t> buf(g.pointwise() ? 0 : static_cast<std::size_t>(rows * cols));
  for (std::size_t n = 0; n < g.n; ++n) {
    const real_t* src = in + n * g.c * g.h * g.w;
    if (!g.pointwise()) {
      im2col(g, src, buf.data());
      src = buf.data();
    }
    MatrixMap dst(out + n * g.o * cols, outs, cols);
    dst.noalias() = w * ConstMatrixMap(src, rows, cols);
    if (bias) {
      for (Eigen::Index o = 0; o < outs; ++o) dst.row(o).array() += bias[o];
    }
  }
}

void dense_conv_backward(const ConvGeometry& g, const real_t* in, const real_t* k,
                         const real_t* gout, real_t* gin, real_t* gk, real_t* gb) {
  const auto rows = static_cast<Eigen::Index>(g.c * g.kh * g.kw);
  const auto cols = static_cast<Eigen::Index>(g.oh * g.ow);
  const auto outs = static_cast<Eigen::Index>(g.o);
  ConstMatrixMap w(k, outs, rows);
  std::vector<real_t> buf(g.pointwise() ? 0 : static_cast<std::size_t>(rows * cols));
  std::vector<real_t> gbuf(g.pointwise() || !gin ? 0 : static_cast<std::size_t>(rows * cols));
  for (std::size_t n = 0; n < g.n; ++n) {
    ConstMatrixMap go(gout + n * g.o * cols, outs, cols);
    if (gb) {
      for (Eigen::Index o = 0; o < outs; ++o) gb[o] += go.row(o).sum();
    }
    if (gk) {
      const real_t* src = in + n * g.c * g.h * g.w;
      if (!g.pointwise()) {
        im2col(g, src, buf.data());
        src = buf.data();
      }
      MatrixMap(gk, outs, rows).noalias() += go * ConstMatrixMap(src, rows, cols).transpose();
    }
    if (gin) {
      real_t* dst = gin + n * g.c * g.h * g.w;
      if (g.pointwise()) {
        MatrixMap(dst, rows, cols).noalias() += w.transpose() * go;
      } else {
        MatrixMap(gbuf.data(), rows, cols).noalias() = w.transpose() * go;
        col2im_add(g, gbuf.data(), dst);
      }
    }
  }
}

// Unary elementwise op: forward value f(x), backward multiplier df(x, y).
template <typename F, typename DF>
Tensor unary(const Tensor& x, const char* name, F f, DF df) {
  std::vector<real_t> out(x.numel());
  const auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xs[i]);
  return make_result(x.shape(), std::move(out), name, {x}, [df](Node& self) {
    real_t* gx = grad_ptr(self, 0);
    const real_t* xv = data_ptr(self, 0);
    for (std::size_t i = 0; i < self.data.size(); ++i) {
      gx[i] += self.grad[i] * df(xv[i], self.data[i]);
    }
  });
}

// Shared normalization backward: for one group of `m` elements (addressed by
// `index(j)`), dx = inv_std * (g - mean(g) - xhat * mean(g * xhat)) with
// g = dy * gamma.
template <typename Index, typename Gamma>
void normalize_group_backward(std::size_t m, Index index, Gamma gamma_of,
                              const real_t* dy, const real_t* xhat,
                              real_t inv_std, real_t* dx) {
  real_t sum_g = 0;
  real_t sum_gx = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = index(j);
    const real_t g = dy[i] * gamma_of(i);
    sum_g += g;
    sum_gx += g * xhat[i];
  }
  const real_t mean_g = sum_g / static_cast<real_t>(m);
  const real_t mean_gx = sum_gx / static_cast<real_t>(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = index(j);
    const real_t g = dy[i] * gamma_of(i);
    dx[i] += inv_std * (g - mean_g - xhat[i] * mean_gx);
  }
}

void check_channel_vector(const Tensor& t, std::size_t channels,
                          const char* what) {
  if (t.rank() != 1 || t.dim(0) != channels) {
    throw ShapeError(fmt::format("{} must have shape [{}], got {}", what,
                                 channels, shape_to_string(t.shape())));
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              const Conv2dOptions& options) {
  require_rank(input, 4, "conv2d input");
  require_rank(kernel, 4, "conv2d kernel");
  ConvGeometry g{};
  g.n = input.dim(0);
  g.c = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.o = kernel.dim(0);
  g.kh = kernel.dim(2);
  g.kw = kernel.dim(3);
  g.stride = options.stride;
  g.padding = options.padding;
  g.groups = options.groups;
  if (g.stride == 0) throw std::invalid_argument("conv2d: stride must be >= 1");
  if (g.groups == 0 || g.c % g.groups != 0) {
    throw ShapeError(fmt::format(
        "conv2d: input channels (dim 1) = {} not divisible by groups = {}",
        g.c, g.groups));
  }
  if (g.o % g.groups != 0) {
    throw ShapeError(fmt::format(
        "conv2d: output channels (kernel dim 0) = {} not divisible by groups "
        "= {}",
        g.o, g.groups));
  }
  if (kernel.dim(1) != g.cg()) {
    throw ShapeError(fmt::format(
        "conv2d: kernel dim 1 = {} but input channels per group = {}",
        kernel.dim(1), g.cg()));
  }
  if (bias.defined()) check_channel_vector(bias, g.o, "conv2d bias");
  if (g.h + 2 * g.padding < g.kh) {
    throw ShapeError(fmt::format(
        "conv2d: input height (dim 2) = {} too small for kernel height {}",
        g.h, g.kh));
  }
  if (g.w + 2 * g.padding < g.kw) {
    throw ShapeError(fmt::format(
        "conv2d: input width (dim 3) = {} too small for kernel width {}", g.w,
        g.kw));
  }
  g.oh = (g.h + 2 * g.padding - g.kh) / g.stride + 1;
  g.ow = (g.w + 2 * g.padding - g.kw) / g.stride + 1;

  std::vector<real_t> out(g.n * g.o * g.oh * g.ow);
  const bool dense = g.groups == 1;
  (dense ? dense_conv_forward : conv_forward)(g, input.data().data(), kernel.data().data(),
                                              bias.defined() ? bias.data().data() : nullptr, out.data());
  const bool has_bias = bias.defined();
  return make_result(
      {g.n, g.o, g.oh, g.ow}, std::move(out), "conv2d", {input, kernel, bias},
      [g, has_bias, dense](Node& self) {
        (dense ? dense_conv_backward : conv_backward)(g, data_ptr(self, 0), data_ptr(self, 1),
                      self.grad.data(), grad_ptr(self, 0), grad_ptr(self, 1),
                      has_bias ? grad_ptr(self, 2) : nullptr);
      });
}

Tensor layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  real_t eps, NormAxes axes) {
  if (!(eps > 0)) throw std::invalid_argument("layer_norm: eps must be > 0");
  require_rank(input, 4, "layer_norm input");
  const std::size_t n = input.dim(0), c = input.dim(1);
  const std::size_t hw = input.dim(2) * input.dim(3);
  check_channel_vector(gamma, c, "layer_norm gamma");
  check_channel_vector(beta, c, "layer_norm beta");

  // A group is one normalization set; element j of group q lives at
  // base(q) + j * step.
  const bool per_sample = axes == NormAxes::kSample;
  const std::size_t groups = per_sample ? n : n * hw;
  const std::size_t m = per_sample ? c * hw : c;
  const std::size_t step = per_sample ? 1 : hw;
  auto base = [=](std::size_t q) {
    return per_sample ? q * c * hw : (q / hw) * c * hw + q % hw;
  };

  const auto x = input.data();
  const auto gm = gamma.data();
  const auto bt = beta.data();
  std::vector<real_t> xhat(x.size());
  std::vector<real_t> inv_std(groups);
  std::vector<real_t> out(x.size());
  for (std::size_t q = 0; q < groups; ++q) {
    const std::size_t b0 = base(q);
    // Shifted accumulation keeps constant groups exactly zero-mean.
    const real_t pivot = x[b0];
    real_t mu = 0;
    for (std::size_t j = 0; j < m; ++j) mu += x[b0 + j * step] - pivot;
    mu = pivot + mu / static_cast<real_t>(m);
    real_t var = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const real_t d = x[b0 + j * step] - mu;
      var += d * d;
    }
    var /= static_cast<real_t>(m);
    const real_t is = real_t{1} / std::sqrt(var + eps);
    inv_std[q] = is;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = b0 + j * step;
      const std::size_t ch = (i / hw) % c;
      xhat[i] = (x[i] - mu) * is;
      out[i] = xhat[i] * gm[ch] + bt[ch];
    }
  }

  return make_result(
      input.shape(), std::move(out), "layer_norm", {input, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), groups, m, step,
       base, c, hw](Node& self) {
        const real_t* gm = data_ptr(self, 1);
        real_t* gx = grad_ptr(self, 0);
        real_t* gg = grad_ptr(self, 1);
        real_t* gb = grad_ptr(self, 2);
        const real_t* dy = self.grad.data();
        auto channel = [&](std::size_t i) { return (i / hw) % c; };
        if (gg || gb) {
          for (std::size_t i = 0; i < xhat.size(); ++i) {
            if (gg) gg[channel(i)] += dy[i] * xhat[i];
            if (gb) gb[channel(i)] += dy[i];
          }
        }
        if (!gx) return;
        for (std::size_t q = 0; q < groups; ++q) {
          const std::size_t b0 = base(q);
          normalize_group_backward(
              m, [&](std::size_t j) { return b0 + j * step; },
              [&](std::size_t i) { return gm[channel(i)]; }, dy, xhat.data(),
              inv_std[q], gx);
        }
      });
}

Tensor batch_norm(const Tensor& input, Tensor& running_mean,
                  Tensor& running_var, const Tensor& gamma, const Tensor& beta,
                  const BatchNormOptions& options) {
  require_rank(input, 4, "batch_norm input");
  const std::size_t n = input.dim(0), c = input.dim(1);
  const std::size_t hw = input.dim(2) * input.dim(3);
  check_channel_vector(running_mean, c, "batch_norm running_mean");
  check_channel_vector(running_var, c, "batch_norm running_var");
  check_channel_vector(gamma, c, "batch_norm gamma");
  check_channel_vector(beta, c, "batch_norm beta");
  if (!(options.eps > 0)) {
    throw std::invalid_argument("batch_norm: eps must be > 0");
  }

  const auto x = input.data();
  const auto gm = gamma.data();
  const auto bt = beta.data();
  const std::size_t count = n * hw;
  std::vector<real_t> mean(c), inv_std(c);

  if (options.training) {
    auto rm = running_mean.mutable_data();
    auto rv = running_var.mutable_data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      const real_t pivot = x[ch * hw];
      real_t mu = 0;
      for (std::size_t s = 0; s < n; ++s) {
        const real_t* p = x.data() + (s * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) mu += p[i] - pivot;
      }
      mu = pivot + mu / static_cast<real_t>(count);
      real_t var = 0;
      for (std::size_t s = 0; s < n; ++s) {
        const real_t* p = x.data() + (s * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) var += (p[i] - mu) * (p[i] - mu);
      }
      const real_t biased = var / static_cast<real_t>(count);
      const real_t unbiased =
          count > 1 ? var / static_cast<real_t>(count - 1) : biased;
      mean[ch] = mu;
      inv_std[ch] = real_t{1} / std::sqrt(biased + options.eps);
      rm[ch] = options.momentum * rm[ch] + (1 - options.momentum) * mu;
      rv[ch] = options.momentum * rv[ch] + (1 - options.momentum) * unbiased;
    }
  } else {
    const auto rm = running_mean.data();
    const auto rv = running_var.data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      if (rv[ch] < 0) {
        throw std::invalid_argument(fmt::format(
            "batch_norm: running variance of channel {} is negative ({})", ch,
            rv[ch]));
      }
      mean[ch] = rm[ch];
      inv_std[ch] = real_t{1} / std::sqrt(rv[ch] + options.eps);
    }
  }

  std::vector<real_t> xhat(x.size()), out(x.size());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t b0 = (s * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        xhat[b0 + i] = (x[b0 + i] - mean[ch]) * inv_std[ch];
        out[b0 + i] = xhat[b0 + i] * gm[ch] + bt[ch];
      }
    }
  }

  const bool training = options.training;
  return make_result(
      input.shape(), std::move(out), "batch_norm", {input, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), n, c, hw,
       training](Node& self) {
        const real_t* gm = data_ptr(self, 1);
        real_t* gx = grad_ptr(self, 0);
        real_t* gg = grad_ptr(self, 1);
        real_t* gb = grad_ptr(self, 2);
        const real_t* dy = self.grad.data();
        for (std::size_t s = 0; s < n; ++s) {
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t b0 = (s * c + ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
              if (gg) gg[ch] += dy[b0 + i] * xhat[b0 + i];
              if (gb) gb[ch] += dy[b0 + i];
            }
          }
        }
        if (!gx) return;
        if (!training) {
          for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t ch = 0; ch < c; ++ch) {
              const std::size_t b0 = (s * c + ch) * hw;
              const real_t k = gm[ch] * inv_std[ch];
              for (std::size_t i = 0; i < hw; ++i) gx[b0 + i] += dy[b0 + i] * k;
            }
          }
          return;
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
          normalize_group_backward(
              n * hw,
              [&](std::size_t j) { return ((j / hw) * c + ch) * hw + j % hw; },
              [&](std::size_t) { return gm[ch]; }, dy, xhat.data(),
              inv_std[ch], gx);
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<real_t> out(a.numel());
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return make_result(a.shape(), std::move(out), "add", {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (real_t* g = grad_ptr(self, k)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<real_t> out(a.numel());
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return make_result(a.shape(), std::move(out), "sub", {a, b}, [](Node& self) {
    if (real_t* g = grad_ptr(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
    if (real_t* g = grad_ptr(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<real_t> out(a.numel());
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return make_result(a.shape(), std::move(out), "mul", {a, b}, [](Node& self) {
    const real_t* x = data_ptr(self, 0);
    const real_t* y = data_ptr(self, 1);
    if (real_t* g = grad_ptr(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[i] += self.grad[i] * y[i];
      }
    }
    if (real_t* g = grad_ptr(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        g[i] += self.grad[i] * x[i];
      }
    }
  });
}

Tensor add_scalar(const Tensor& x, real_t value) {
  return unary(
      x, "add_scalar", [value](real_t v) { return v + value; },
      [](real_t, real_t) { return real_t{1}; });
}

Tensor mul_scalar(const Tensor& x, real_t value) {
  return unary(
      x, "mul_scalar", [value](real_t v) { return v * value; },
      [value](real_t, real_t) { return value; });
}

Tensor scale(const Tensor& x, const Tensor& s) {
  if (s.numel() != 1) {
    throw ShapeError(fmt::format("scale: factor must hold one element, got {}",
                                 shape_to_string(s.shape())));
  }
  const real_t k = s.item();
  std::vector<real_t> out(x.numel());
  const auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xs[i] * k;
  return make_result(x.shape(), std::move(out), "scale", {x, s},
                     [](Node& self) {
                       const real_t* xv = data_ptr(self, 0);
                       const real_t k = data_ptr(self, 1)[0];
                       if (real_t* g = grad_ptr(self, 0)) {
                         for (std::size_t i = 0; i < self.grad.size(); ++i) {
                           g[i] += self.grad[i] * k;
                         }
                       }
                       if (real_t* g = grad_ptr(self, 1)) {
                         real_t acc = 0;
                         for (std::size_t i = 0; i < self.grad.size(); ++i) {
                           acc += self.grad[i] * xv[i];
                         }
                         g[0] += acc;
                       }
                     });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](real_t v) { return v > 0 ? v : real_t{0}; },
      [](real_t v, real_t) { return v > 0 ? real_t{1} : real_t{0}; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid", [](real_t v) { return real_t{1} / (real_t{1} + std::exp(-v)); },
      [](real_t, real_t y) { return y * (real_t{1} - y); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, "exp", [](real_t v) { return std::exp(v); },
      [](real_t, real_t y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary(
      x, "log", [](real_t v) { return std::log(v); },
      [](real_t v, real_t) { return real_t{1} / v; });
}

Tensor xlogx(const Tensor& x) {
  return unary(
      x, "xlogx", [](real_t v) { return v == 0 ? real_t{0} : v * std::log(v); },
      [](real_t v, real_t) {
        return v == 0 ? real_t{0} : std::log(v) + real_t{1};
      });
}

std::pair<Tensor, Tensor> split_halves_channelwise(const Tensor& x) {
  require_rank(x, 4, "split_halves_channelwise input");
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t hw = x.dim(2) * x.dim(3);
  if (c % 2 != 0) {
    throw ShapeError(fmt::format(
        "split_halves_channelwise: odd channel count (dim 1) = {}", c));
  }
  const std::size_t half = c / 2;
  const auto xs = x.data();
  auto make_half = [&](std::size_t which) {
    std::vector<real_t> out(n * half * hw);
    for (std::size_t s = 0; s < n; ++s) {
      const real_t* src = xs.data() + (s * c + which * half) * hw;
      std::copy(src, src + half * hw, out.data() + s * half * hw);
    }
    return make_result({n, half, x.dim(2), x.dim(3)}, std::move(out),
                       "split_half", {x},
                       [n, c, half, hw, which](Node& self) {
                         real_t* g = grad_ptr(self, 0);
                         for (std::size_t s = 0; s < n; ++s) {
                           real_t* dst = g + (s * c + which * half) * hw;
                           const real_t* src =
                               self.grad.data() + s * half * hw;
                           for (std::size_t i = 0; i < half * hw; ++i) {
                             dst[i] += src[i];
                           }
                         }
                       });
  };
  return {make_half(0), make_half(1)};
}

Tensor simple_gate(const Tensor& x) {
  require_rank(x, 4, "simple_gate input");
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t hw = x.dim(2) * x.dim(3);
  if (c % 2 != 0) {
    throw ShapeError(
        fmt::format("simple_gate: odd channel count (dim 1) = {}", c));
  }
  const std::size_t half = c / 2;
  const std::size_t span = half * hw;
  const auto xs = x.data();
  std::vector<real_t> out(n * span);
  for (std::size_t s = 0; s < n; ++s) {
    const real_t* a = xs.data() + s * c * hw;
    const real_t* b = a + span;
    real_t* o = out.data() + s * span;
    for (std::size_t i = 0; i < span; ++i) o[i] = a[i] * b[i];
  }
  return make_result({n, half, x.dim(2), x.dim(3)}, std::move(out),
                     "simple_gate", {x}, [n, c, hw, span](Node& self) {
                       real_t* g = grad_ptr(self, 0);
                       const real_t* xv = data_ptr(self, 0);
                       for (std::size_t s = 0; s < n; ++s) {
                         const real_t* a = xv + s * c * hw;
                         const real_t* b = a + span;
                         real_t* ga = g + s * c * hw;
                         real_t* gb = ga + span;
                         const real_t* go = self.grad.data() + s * span;
                         for (std::size_t i = 0; i < span; ++i) {
                           ga[i] += go[i] * b[i];
                           gb[i] += go[i] * a[i];
                         }
                       }
                     });
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 4, "global_avg_pool input");
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t hw = x.dim(2) * x.dim(3);
  const auto xs = x.data();
  std::vector<real_t> out(n * c);
  for (std::size_t p = 0; p < n * c; ++p) {
    real_t acc = 0;
    for (std::size_t i = 0; i < hw; ++i) acc += xs[p * hw + i];
    out[p] = acc / static_cast<real_t>(hw);
  }
  return make_result({n, c, 1, 1}, std::move(out), "global_avg_pool", {x},
                     [hw](Node& self) {
                       real_t* g = grad_ptr(self, 0);
                       const real_t inv = real_t{1} / static_cast<real_t>(hw);
                       for (std::size_t p = 0; p < self.grad.size(); ++p) {
                         const real_t v = self.grad[p] * inv;
                         for (std::size_t i = 0; i < hw; ++i) g[p * hw + i] += v;
                       }
                     });
}

Tensor mul_channelwise(const Tensor& x, const Tensor& s) {
  require_rank(x, 4, "mul_channelwise input");
  require_rank(s, 4, "mul_channelwise scale");
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t hw = x.dim(2) * x.dim(3);
  if (s.dim(0) != n || s.dim(1) != c || s.dim(2) != 1 || s.dim(3) != 1) {
    throw ShapeError(fmt::format(
        "mul_channelwise: scale must be [{}, {}, 1, 1], got {}", n, c,
        shape_to_string(s.shape())));
  }
  const auto xs = x.data();
  const auto ss = s.data();
  std::vector<real_t> out(xs.size());
  for (std::size_t p = 0; p < n * c; ++p) {
    for (std::size_t i = 0; i < hw; ++i) out[p * hw + i] = xs[p * hw + i] * ss[p];
  }
  return make_result(x.shape(), std::move(out), "mul_channelwise", {x, s},
                     [n, c, hw](Node& self) {
                       const real_t* xv = data_ptr(self, 0);
                       const real_t* sv = data_ptr(self, 1);
                       real_t* gx = grad_ptr(self, 0);
                       real_t* gs = grad_ptr(self, 1);
                       const real_t* go = self.grad.data();
                       for (std::size_t p = 0; p < n * c; ++p) {
                         real_t acc = 0;
                         for (std::size_t i = 0; i < hw; ++i) {
                           if (gx) gx[p * hw + i] += go[p * hw + i] * sv[p];
                           acc += go[p * hw + i] * xv[p * hw + i];
                         }
                         if (gs) gs[p] += acc;
                       }
                     });
}

Tensor pixel_shuffle(const Tensor& x, std::size_t factor) {
  require_rank(x, 4, "pixel_shuffle input");
  const std::size_t r = factor;
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (r == 0 || cin % (r * r) != 0) {
    throw ShapeError(fmt::format(
        "pixel_shuffle: channels (dim 1) = {} not divisible by factor^2 = {}",
        cin, r * r));
  }
  const std::size_t c = cin / (r * r);
  const std::size_t oh = h * r, ow = w * r;
  // out[n, ch, y*r + i, x*r + j] = in[n, ch*r*r + i*r + j, y, x]
  auto in_index = [=](std::size_t s, std::size_t ch, std::size_t oy,
                      std::size_t ox) {
    const std::size_t ic = ch * r * r + (oy % r) * r + (ox % r);
    return ((s * cin + ic) * h + oy / r) * w + ox / r;
  };
  const auto xs = x.data();
  std::vector<real_t> out(xs.size());
  std::size_t o = 0;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) out[o++] = xs[in_index(s, ch, oy, ox)];
  return make_result({n, c, oh, ow}, std::move(out), "pixel_shuffle", {x},
                     [=](Node& self) {
                       real_t* g = grad_ptr(self, 0);
                       std::size_t k = 0;
                       for (std::size_t s = 0; s < n; ++s)
                         for (std::size_t ch = 0; ch < c; ++ch)
                           for (std::size_t oy = 0; oy < oh; ++oy)
                             for (std::size_t ox = 0; ox < ow; ++ox) {
                               g[in_index(s, ch, oy, ox)] += self.grad[k++];
                             }
                     });
}

Tensor softmax(const Tensor& logits, real_t temperature) {
  if (!(temperature > 0)) {
    throw std::invalid_argument(
        fmt::format("softmax: temperature must be > 0, got {}", temperature));
  }
  require_rank(logits, 1, "softmax input");
  const auto v = logits.data();
  if (v.empty()) throw ShapeError("softmax: empty input");
  const real_t mx = *std::max_element(v.begin(), v.end());
  std::vector<real_t> out(v.size());
  real_t total = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp((v[i] - mx) / temperature);
    total += out[i];
  }
  for (real_t& o : out) o /= total;
  return make_result(logits.shape(), std::move(out), "softmax", {logits},
                     [temperature](Node& self) {
                       real_t* g = grad_ptr(self, 0);
                       const auto& y = self.data;
                       real_t dot = 0;
                       for (std::size_t i = 0; i < y.size(); ++i) {
                         dot += self.grad[i] * y[i];
                       }
                       for (std::size_t i = 0; i < y.size(); ++i) {
                         g[i] += y[i] * (self.grad[i] - dot) / temperature;
                       }
                     });
}

Tensor select(const Tensor& v, std::size_t index) {
  require_rank(v, 1, "select input");
  if (index >= v.dim(0)) {
    throw ShapeError(fmt::format("select: index {} out of range for dim 0 = {}",
                                 index, v.dim(0)));
  }
  return make_result({1}, {v.data()[index]}, "select", {v},
                     [index](Node& self) {
                       grad_ptr(self, 0)[index] += self.grad[0];
                     });
}

Tensor weighted_sum(std::span<const Tensor> xs, const Tensor& weights) {
  if (xs.empty()) throw ShapeError("weighted_sum: no operands");
  require_rank(weights, 1, "weighted_sum weights");
  if (weights.dim(0) != xs.size()) {
    throw ShapeError(fmt::format(
        "weighted_sum: weights dim 0 = {} but {} operands were given",
        weights.dim(0), xs.size()));
  }
  for (const Tensor& x : xs) require_same_shape(xs[0], x, "weighted_sum");
  const auto w = weights.data();
  std::vector<real_t> out(xs[0].numel(), real_t{0});
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto d = xs[k].data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[k] * d[i];
  }
  std::vector<Tensor> inputs(xs.begin(), xs.end());
  inputs.push_back(weights);
  const std::size_t count = xs.size();
  return make_result(xs[0].shape(), std::move(out), "weighted_sum",
                     std::move(inputs), [count](Node& self) {
                       const real_t* w = data_ptr(self, count);
                       real_t* gw = grad_ptr(self, count);
                       const real_t* go = self.grad.data();
                       const std::size_t m = self.grad.size();
                       for (std::size_t k = 0; k < count; ++k) {
                         const real_t* x = data_ptr(self, k);
                         if (real_t* gx = grad_ptr(self, k)) {
                           for (std::size_t i = 0; i < m; ++i) {
                             gx[i] += w[k] * go[i];
                           }
                         }
                         if (gw) {
                           real_t acc = 0;
                           for (std::size_t i = 0; i < m; ++i) acc += go[i] * x[i];
                           gw[k] += acc;
                         }
                       }
                     });
}

Tensor sum(const Tensor& x) {
  const auto xs = x.data();
  const real_t total = std::accumulate(xs.begin(), xs.end(), real_t{0});
  return make_result({1}, {total}, "sum", {x}, [](Node& self) {
    real_t* g = grad_ptr(self, 0);
    const std::size_t m = self.inputs[0]->data.size();
    for (std::size_t i = 0; i < m; ++i) g[i] += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  return mul_scalar(sum(x), real_t{1} / static_cast<real_t>(x.numel()));
}

Tensor mse_loss(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse_loss");
  const auto x = a.data(), y = b.data();
  real_t acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const real_t d = x[i] - y[i];
    acc += d * d;
  }
  const real_t n = static_cast<real_t>(x.size());
  return make_result({1}, {acc / n}, "mse_loss", {a, b}, [n](Node& self) {
    const real_t* x = data_ptr(self, 0);
    const real_t* y = data_ptr(self, 1);
    const std::size_t m = self.inputs[0]->data.size();
    const real_t k = 2 * self.grad[0] / n;
    if (real_t* g = grad_ptr(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) g[i] += k * (x[i] - y[i]);
    }
    if (real_t* g = grad_ptr(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) g[i] -= k * (x[i] - y[i]);
    }
  });
}

}  // namespace dnas::ops
