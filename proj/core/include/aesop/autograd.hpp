#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "aesop/tensor.hpp"

namespace aesop::ag {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// Receives the gradient of the loss w.r.t. the node's value and accumulates
/// into the node's inputs.
using BackwardFn = std::function<void(const Tensor& grad_out)>;

struct Node {
  Tensor value;
  Tensor grad;  // empty until something accumulates into it
  bool requires_grad = false;
  std::vector<NodePtr> inputs;
  BackwardFn backward;

  void accumulate(const Tensor& g);
};

/// Handle to a value in a dynamically recorded computation graph.
///
/// Leaves created with requires_grad = true collect gradients across calls
/// to backward() until zero_grad(). Interior nodes are recorded only while
/// gradient mode is enabled and at least one input requires a gradient, so
/// forward passes through frozen models with constant inputs build no graph.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  /// Records an interior node. `fn` may assume grad_out has the value's shape.
  static Var from_op(Tensor value, std::vector<Var> inputs, BackwardFn fn);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  /// In-place update of a leaf value (optimizer steps, parameter loading).
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient, or zeros when nothing has been accumulated.
  Tensor grad() const;
  void zero_grad() { node_->grad = Tensor(); }

  /// Scalar value of a one-element tensor.
  double item() const;

  /// A new constant leaf holding a copy of the value.
  Var detach() const { return Var(node_->value, false); }

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

/// Backpropagates from a one-element root with seed 1.
void backward(const Var& root);
/// Backpropagates from an arbitrary root with the given upstream gradient.
void backward(const Var& root, const Tensor& seed);

bool grad_enabled();

/// Disables graph recording in the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace aesop::ag
