// Copyright 2026 The trtvit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "trtvit/op_desc.hpp"
#include "trtvit/tensor.hpp"

namespace trtvit {

template <class T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::string op;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  Tensor<T>& grad_buffer() {
    if (grad.shape() != value.shape()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

/// Shared handle to a value in the (optional) gradient graph. Parameters are
/// leaves that require grad; op results only keep their parents when the
/// context records gradients, so inference frees intermediates eagerly.
template <class T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var leaf(Tensor<T> value, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    n->op = "leaf";
    return Var(std::move(n));
  }

  explicit operator bool() const { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_ && node_->grad.shape() == node_->value.shape() && !node_->grad.empty(); }
  const Tensor<T>& grad() const { return node_->grad; }
  void zero_grad() { node_->grad = Tensor<T>(); }
  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Per-execution state threaded through every op. Not shared across threads.
template <class T>
struct Context {
  MacCounter* counter = nullptr;
  Trace* trace = nullptr;
  bool record_grad = false;

  void count(std::uint64_t macs) const {
    if (counter) counter->add(macs);
  }
  void record(OpDesc desc) const {
    if (trace) trace->push_back(std::move(desc));
  }
  /// Same counter and grad mode, no trace; used inside composite ops that
  /// record themselves as a single descriptor.
  Context untraced() const { return Context{counter, nullptr, record_grad}; }
};

/// Wraps a freshly computed value. When the context records gradients and
/// any input requires grad, the result keeps its parents and backward closure.
template <class T>
Var<T> make_result(const Context<T>& ctx, Tensor<T> value, std::vector<Var<T>> inputs, const char* op,
                   std::function<void(Node<T>&)> backward_fn) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = op;
  if (ctx.record_grad) {
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (any) {
      n->requires_grad = true;
      for (auto& in : inputs) n->parents.push_back(in.shared());
      n->backward_fn = std::move(backward_fn);
    }
  }
  return Var<T>(std::move(n));
}

/// Reverse-mode sweep from root, seeded with upstream (same shape as root).
/// Only 64-bit graphs can be differentiated.
template <class T>
void backward(const Var<T>& root, const Tensor<T>& upstream);

}  // namespace trtvit
