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

#include "dnas/tensor/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_set>

#include <fmt/format.h>

namespace dnas {

namespace {

std::atomic<std::uint64_t> g_next_ordinal{1};
thread_local bool t_grad_enabled = true;

std::shared_ptr<detail::Node> new_node(Shape shape, std::vector<real_t> data,
                                       bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw ShapeError(fmt::format("tensor of shape {} cannot hold {} values",
                                 shape_to_string(shape), data.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  node->ordinal = g_next_ordinal.fetch_add(1, std::memory_order_relaxed);
  return node;
}

void require_defined(const std::shared_ptr<detail::Node>& node) {
  if (!node) throw std::logic_error("operation on an undefined tensor");
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, ", "));
}

std::vector<real_t>& detail::Node::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), real_t{0});
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<real_t> values, bool requires_grad)
    : node_(new_node(std::move(shape), std::move(values), requires_grad)) {}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), real_t{0}, requires_grad);
}

Tensor Tensor::full(Shape shape, real_t value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<real_t>(n, value), requires_grad);
}

Tensor Tensor::scalar(real_t value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  require_defined(node_);
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw ShapeError(fmt::format("axis {} out of range for shape {}", axis,
                                 shape_to_string(s)));
  }
  return s[axis];
}

std::size_t Tensor::numel() const {
  require_defined(node_);
  return node_->data.size();
}

std::span<const real_t> Tensor::data() const {
  require_defined(node_);
  return node_->data;
}

std::span<real_t> Tensor::mutable_data() {
  require_defined(node_);
  return node_->data;
}

real_t Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError(fmt::format("item() needs a single element, shape is {}",
                                 shape_to_string(shape())));
  }
  return node_->data[0];
}

bool Tensor::requires_grad() const {
  require_defined(node_);
  return node_->requires_grad;
}

Tensor& Tensor::set_requires_grad(bool value) {
  require_defined(node_);
  if (!is_leaf()) {
    throw std::logic_error("requires_grad can only be changed on leaf tensors");
  }
  node_->requires_grad = value;
  return *this;
}

bool Tensor::is_leaf() const {
  require_defined(node_);
  return !node_->backward;
}

std::span<const real_t> Tensor::grad() const {
  require_defined(node_);
  return node_->ensure_grad();
}

std::span<real_t> Tensor::mutable_grad() {
  require_defined(node_);
  return node_->ensure_grad();
}

void Tensor::zero_grad() {
  require_defined(node_);
  std::fill(node_->grad.begin(), node_->grad.end(), real_t{0});
}

Tensor Tensor::detach() const {
  require_defined(node_);
  return Tensor(node_->shape, node_->data, false);
}

Tensor Tensor::clone() const {
  require_defined(node_);
  return Tensor(node_->shape, node_->data, node_->requires_grad);
}

const char* Tensor::op_name() const {
  require_defined(node_);
  return node_->op;
}

Tensor Tensor::from_node(std::shared_ptr<detail::Node> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) {
  t_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  if (!loss.defined()) throw std::logic_error("backward on undefined tensor");
  if (loss.numel() != 1) {
    throw ShapeError(fmt::format("backward needs a scalar loss, got shape {}",
                                 shape_to_string(loss.shape())));
  }
  if (!loss.requires_grad()) {
    throw std::logic_error(
        "backward on a loss that was not recorded on the tape");
  }

  // Collect the recorded subgraph, then replay it newest-first.
  std::vector<detail::Node*> tape;
  std::unordered_set<const detail::Node*> seen;
  std::vector<detail::Node*> stack{loss.node().get()};
  seen.insert(stack.back());
  while (!stack.empty()) {
    detail::Node* node = stack.back();
    stack.pop_back();
    tape.push_back(node);
    for (const auto& in : node->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) {
        stack.push_back(in.get());
      }
    }
  }
  std::sort(tape.begin(), tape.end(),
            [](const detail::Node* a, const detail::Node* b) {
              return a->ordinal > b->ordinal;
            });

  loss.node()->ensure_grad()[0] += real_t{1};
  for (detail::Node* node : tape) {
    if (!node->backward || node->grad.empty()) continue;
    for (const auto& in : node->inputs) {
      if (in->requires_grad) in->ensure_grad();
    }
    node->backward(*node);
  }
}

Tensor detail::make_result(Shape shape, std::vector<real_t> data,
                           const char* op, std::vector<Tensor> inputs,
                           std::function<void(Node&)> backward_fn) {
  bool track = false;
  if (t_grad_enabled) {
    for (const Tensor& t : inputs) {
      if (t.defined() && t.requires_grad()) {
        track = true;
        break;
      }
    }
  }
  auto node = new_node(std::move(shape), std::move(data), track);
  node->op = op;
  if (track) {
    node->inputs.reserve(inputs.size());
    for (Tensor& t : inputs) {
      // Undefined optional operands (e.g. a missing bias) are stored as
      // constants so input positions stay stable for backward_fn.
      node->inputs.push_back(t.defined()
                                 ? t.node()
                                 : std::make_shared<detail::Node>());
    }
    node->backward = std::move(backward_fn);
  }
  return Tensor::from_node(std::move(node));
}

}  // namespace dnas
