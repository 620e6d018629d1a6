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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnas {

#ifdef DNAS_FLOAT32
using real_t = float;
#else
using real_t = double;
#endif

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Raised when operand shapes are incompatible. The message names the
/// offending dimension.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

/// One recorded primitive. Nodes are ordered by `ordinal`, which increases
/// monotonically with execution; reverse ordinal order is the backward
/// replay order of the tape.
struct Node {
  Shape shape;
  std::vector<real_t> data;
  std::vector<real_t> grad;
  bool requires_grad = false;
  std::uint64_t ordinal = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the grads of `inputs`.
  std::function<void(Node&)> backward;

  std::vector<real_t>& ensure_grad();
};

}  // namespace detail

/// N-dimensional value-plus-gradient array. Copies share storage (handle
/// semantics); use `clone()` or `detach()` for an independent copy.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<real_t> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, real_t value, bool requires_grad = false);
  static Tensor scalar(real_t value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const real_t> data() const;
  // In-place access for leaves (parameters, buffers). Mutating an
  // intermediate result invalidates the recorded backward pass.
  std::span<real_t> mutable_data();
  real_t item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool value);
  bool is_leaf() const;

  // Gradient accumulator; allocated zero-filled on first access.
  std::span<const real_t> grad() const;
  std::span<real_t> mutable_grad();
  void zero_grad();

  Tensor detach() const;
  Tensor clone() const;
  const char* op_name() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  static Tensor from_node(std::shared_ptr<detail::Node> node);

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Replays the tape reachable from `loss` in reverse execution order and
/// accumulates d loss / d leaf into every leaf that requires grad.
void backward(const Tensor& loss);

bool grad_enabled();

/// Disables tape recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

/// Builds an op result. When any input requires grad (and recording is on)
/// the result is attached to the tape with `backward_fn`; otherwise it is a
/// plain constant and `backward_fn` is dropped.
Tensor make_result(Shape shape, std::vector<real_t> data, const char* op,
                   std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward_fn);

}  // namespace detail

}  // namespace dnas
