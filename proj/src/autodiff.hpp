#pragma once

// Tape-based reverse-mode differentiation over dense complex tensors.
//
// Gradient convention: for a real scalar loss L and a complex entry z, the
// stored gradient is dL/dRe(z) + i*dL/dIm(z). Under this convention a
// holomorphic map y = f(z) propagates G_z = conj(f'(z)) * G_y, and a linear map
// y = A x propagates G_x = A^H G_y.

#include <complex>
#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace claqs::ad {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Shape& shape() const;
  std::size_t size() const;
  std::span<const cplx> values() const;
  cplx item() const;
  /// Accumulated gradient; empty for untracked nodes or before backward().
  std::span<const cplx> grad() const;
  bool tracked() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(Shape shape, std::vector<cplx> values);
  Tensor scalar(cplx value) { return constant({}, {value}); }

  /// Tracked leaf viewing external storage. Gradients accumulate into `grad`,
  /// which must have the same length and outlive the tape.
  Tensor leaf(Shape shape, std::span<const cplx> values, std::span<cplx> grad);
  /// Untracked node viewing external storage without copying it.
  Tensor view(Shape shape, std::span<const cplx> values);
  /// Tracked leaf owning its values and gradient.
  Tensor variable(Shape shape, std::vector<cplx> values);

  /// Records a computed node. `parents` determines whether it is tracked; the
  /// backward rule runs only for tracked nodes and may read grad(self).
  Tensor record(Shape shape, std::vector<cplx> values, std::vector<std::size_t> parents,
                BackwardFn backward);

  void backward(const Tensor& scalar);

  std::size_t size() const { return nodes_.size(); }
  const Shape& shape(std::size_t id) const { return nodes_[id].shape; }
  std::span<const cplx> value(std::size_t id) const { return nodes_[id].value; }
  std::span<cplx> grad(std::size_t id) { return nodes_[id].grad; }
  std::span<const cplx> grad(std::size_t id) const { return nodes_[id].grad; }
  bool tracked(std::size_t id) const { return nodes_[id].tracked; }
  const std::vector<std::size_t>& parents(std::size_t id) const { return nodes_[id].parents; }

 private:
  struct Node {
    Shape shape;
    std::vector<cplx> owned;
    std::span<const cplx> value;
    std::vector<cplx> grad_owned;
    std::span<cplx> grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool tracked = false;
    bool is_leaf = false;
  };

  std::deque<Node> nodes_;
};

// Operations. All shapes are explicit; the only broadcast is scalar x tensor.

Tensor matvec(const Tensor& m, const Tensor& v);
Tensor weighted_sum(const Tensor& coeffs, std::span<const Tensor> terms);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
/// Multiplies every entry by a fixed complex constant.
Tensor scale(const Tensor& t, cplx factor);
/// 0-dim tensor times tensor.
Tensor mul(const Tensor& scalar, const Tensor& t);
/// Elementwise product with constant (untracked) factors.
Tensor mul_const(const Tensor& t, std::span<const cplx> factors);
Tensor conj(const Tensor& t);
Tensor real(const Tensor& t);
Tensor abs(const Tensor& t);
/// Real-valued activations applied to the real part.
Tensor tanh(const Tensor& t);
Tensor relu(const Tensor& t);
/// Re(t)^p elementwise.
Tensor pow_real(const Tensor& t, double p);
Tensor sum(const Tensor& t);
/// Sum of |t_i|^2 as a 0-dim real tensor.
Tensor squared_norm(const Tensor& t);
Tensor gather(const Tensor& t, std::span<const std::size_t> indices);
Tensor element(const Tensor& t, std::size_t index);
/// Stacks 0-dim tensors into a vector.
Tensor stack(std::span<const Tensor> scalars);
/// Softmax over the real parts of a vector.
Tensor softmax(const Tensor& t);
/// -log softmax(Re logits)[label], a 0-dim real tensor.
Tensor softmax_cross_entropy(const Tensor& logits, std::size_t label);

}  // namespace claqs::ad
