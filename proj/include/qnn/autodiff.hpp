#pragma once

// Reverse-mode automatic differentiation over real tensors.
//
// A Tape records nodes in creation order, which is a topological order;
// backward() walks it once in reverse. Quaternion layers are expressed on
// the tape through their real component planes: a quaternion feature map of
// C channels is a real [N, 4C, H, W] tensor whose channel index is
// component * C + channel.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnn/activations.hpp"
#include "qnn/kernels.hpp"
#include "qnn/tensor.hpp"

namespace qnn {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <std::floating_point T>
class Tape;

template <std::floating_point T>
class Var {
 public:
  Var() = default;

  Tape<T>* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// d loss / d leaf for every leaf that requires a gradient.
template <std::floating_point T>
class Gradients {
 public:
  const Tensor<T>& operator[](const Var<T>& v) const {
    auto it = grads_.find(v.id());
    if (it == grads_.end()) throw std::out_of_range("Gradients: no gradient for this variable");
    return it->second;
  }
  bool contains(const Var<T>& v) const { return grads_.count(v.id()) != 0; }
  std::size_t size() const { return grads_.size(); }
  bool empty() const { return grads_.empty(); }

 private:
  friend class Tape<T>;
  std::map<std::size_t, Tensor<T>> grads_;
};

template <std::floating_point T>
class Tape {
 public:
  /// Receives the gradient of the node's output; pushes contributions to its
  /// parents through accumulate().
  using BackwardFn = std::function<void(Tape&, const Tensor<T>& grad_out)>;

  explicit Tape(Backend backend = Backend::Parallel) : backend_(backend) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Backend backend() const { return backend_; }
  std::size_t size() const { return nodes_.size(); }

  Var<T> leaf(Tensor<T> value, bool requires_grad = false);
  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }
  Var<T> parameter(Tensor<T> value) { return leaf(std::move(value), true); }

  /// Appends an operation node. The node requires a gradient iff any parent
  /// does; otherwise `backward` is dropped.
  Var<T> record(std::string op, Tensor<T> value, const std::vector<Var<T>>& parents,
                BackwardFn backward);

  /// Gradients of a scalar (single-element) loss.
  Gradients<T> backward(const Var<T>& loss);

  /// Gradient buffer of a node during backward(), zero-initialized on first use.
  Tensor<T>& accumulate(const Var<T>& v);

  const Tensor<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  const std::string& op(std::size_t id) const { return nodes_.at(id).op; }

 private:
  struct Node {
    std::string op;
    Tensor<T> value;
    bool requires_grad = false;
    bool is_leaf = false;
    BackwardFn backward;
  };

  Backend backend_;
  std::vector<Node> nodes_;
  std::vector<std::optional<Tensor<T>>> grads_;
};

template <std::floating_point T>
const Tensor<T>& Var<T>::value() const {
  return tape_->value(id_);
}

template <std::floating_point T>
bool Var<T>::requires_grad() const {
  return tape_->requires_grad(id_);
}

namespace ad {

// Elementwise, identical shapes.
template <std::floating_point T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <std::floating_point T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <std::floating_point T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <std::floating_point T> Var<T> div(const Var<T>& a, const Var<T>& b);
template <std::floating_point T> Var<T> neg(const Var<T>& a);
template <std::floating_point T> Var<T> scale(const Var<T>& a, T s);
template <std::floating_point T> Var<T> tanh(const Var<T>& a);
template <std::floating_point T> Var<T> sin(const Var<T>& a);
template <std::floating_point T> Var<T> cos(const Var<T>& a);
template <std::floating_point T> Var<T> sqrt(const Var<T>& a);
template <std::floating_point T> Var<T> relu(const Var<T>& a);
template <std::floating_point T> Var<T> atan2(const Var<T>& y, const Var<T>& x);

// Reductions to a single element.
template <std::floating_point T> Var<T> sum(const Var<T>& a);
template <std::floating_point T> Var<T> mean(const Var<T>& a);

template <std::floating_point T> Var<T> reshape(const Var<T>& a, Shape shape);

/// [m, k] x [k, n] -> [m, n]
template <std::floating_point T> Var<T> matmul(const Var<T>& a, const Var<T>& b);

/// x [N, in], weight [out, in], bias [out] (optional) -> [N, out]
template <std::floating_point T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const std::optional<Var<T>>& bias);

/// Cross-correlation: x [N, Cin, H, W], weight [Cout, Cin, K, K], bias [Cout]
/// (optional); stride 1, zero padding (K - 1) / 2, K odd.
template <std::floating_point T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const std::optional<Var<T>>& bias);

/// Mean over non-overlapping window x window patches of [N, C, H, W].
template <std::floating_point T> Var<T> avgpool2d(const Var<T>& x, std::size_t window);

/// Mean softmax cross-entropy of logits [N, K] against integer labels.
template <std::floating_point T>
Var<T> softmax_cross_entropy(const Var<T>& logits, const std::vector<int>& labels);

/// Quaternion activation over planar [N, 4C, ...] (or [N, 4M]) input.
template <std::floating_point T>
Var<T> qactivation(const Var<T>& x, ActivationKind kind, AngleConvention conv);

/// Real weights of F (x) w for quaternion kernels [4, Cout, Cin, K, K]:
/// returns [4 Cout, 4 Cin, K, K].
template <std::floating_point T> Var<T> hamilton_expand_right(const Var<T>& kernel);

/// Real weights of w (x) a for quaternion matrices [4, M, N]: returns [4M, 4N].
template <std::floating_point T> Var<T> hamilton_expand_left(const Var<T>& weight);

/// Quaternion convolution G = sum F (x) w plus bias [4, Cout].
template <std::floating_point T>
Var<T> qconv2d(const Var<T>& x, const Var<T>& kernel, const std::optional<Var<T>>& bias);

/// Quaternion linear map z = W a + b on planar x [N, 4n]; W [4, m, n], b [4, m].
template <std::floating_point T>
Var<T> qlinear(const Var<T>& x, const Var<T>& weight, const std::optional<Var<T>>& bias);

}  // namespace ad

template <std::floating_point T>
Var<T> operator+(const Var<T>& a, const Var<T>& b) { return ad::add(a, b); }
template <std::floating_point T>
Var<T> operator-(const Var<T>& a, const Var<T>& b) { return ad::sub(a, b); }
template <std::floating_point T>
Var<T> operator*(const Var<T>& a, const Var<T>& b) { return ad::mul(a, b); }
template <std::floating_point T>
Var<T> operator/(const Var<T>& a, const Var<T>& b) { return ad::div(a, b); }
template <std::floating_point T>
Var<T> operator-(const Var<T>& a) { return ad::neg(a); }

}  // namespace qnn
