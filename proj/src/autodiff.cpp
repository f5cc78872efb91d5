#include "autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace claqs::ad {

namespace {

Error dim_error(const std::string& what) { return Error(ErrorKind::Dimension, what); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw dim_error(std::string(op) + ": operand shapes differ");
  }
}

void require_scalar(const Tensor& t, const char* op) {
  if (t.size() != 1 || !t.shape().empty()) {
    throw dim_error(std::string(op) + ": expected a 0-dim tensor");
  }
}

// Applies fn(parent_grad_span) only when the parent is tracked.
template <typename Fn>
void with_grad(Tape& tape, std::size_t id, Fn&& fn) {
  if (tape.tracked(id)) fn(tape.grad(id));
}

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const Shape& Tensor::shape() const { return tape_->shape(id_); }
std::size_t Tensor::size() const { return tape_->value(id_).size(); }
std::span<const cplx> Tensor::values() const { return tape_->value(id_); }
std::span<const cplx> Tensor::grad() const {
  return static_cast<const Tape*>(tape_)->grad(id_);
}
bool Tensor::tracked() const { return tape_->tracked(id_); }

cplx Tensor::item() const {
  if (size() != 1) throw dim_error("item() on a tensor with more than one entry");
  return values()[0];
}

Tensor Tape::constant(Shape shape, std::vector<cplx> values) {
  if (numel(shape) != values.size()) throw dim_error("constant: values do not match shape");
  Node& node = nodes_.emplace_back();
  node.shape = std::move(shape);
  node.owned = std::move(values);
  node.value = node.owned;
  return {this, nodes_.size() - 1};
}

Tensor Tape::leaf(Shape shape, std::span<const cplx> values, std::span<cplx> grad) {
  if (numel(shape) != values.size() || grad.size() != values.size()) {
    throw dim_error("leaf: storage does not match shape");
  }
  Node& node = nodes_.emplace_back();
  node.shape = std::move(shape);
  node.value = values;
  node.grad = grad;
  node.tracked = true;
  node.is_leaf = true;
  return {this, nodes_.size() - 1};
}

Tensor Tape::view(Shape shape, std::span<const cplx> values) {
  if (numel(shape) != values.size()) throw dim_error("view: storage does not match shape");
  Node& node = nodes_.emplace_back();
  node.shape = std::move(shape);
  node.value = values;
  node.is_leaf = true;
  return {this, nodes_.size() - 1};
}

Tensor Tape::variable(Shape shape, std::vector<cplx> values) {
  if (numel(shape) != values.size()) throw dim_error("variable: values do not match shape");
  Node& node = nodes_.emplace_back();
  node.shape = std::move(shape);
  node.owned = std::move(values);
  node.value = node.owned;
  node.grad_owned.assign(node.owned.size(), cplx{});
  node.grad = node.grad_owned;
  node.tracked = true;
  node.is_leaf = true;
  return {this, nodes_.size() - 1};
}

Tensor Tape::record(Shape shape, std::vector<cplx> values, std::vector<std::size_t> parents,
                    BackwardFn backward) {
  if (numel(shape) != values.size()) throw dim_error("record: values do not match shape");
  const std::size_t self = nodes_.size();
  bool tracked = false;
  for (auto p : parents) {
    if (p >= self) throw Error(ErrorKind::Autodiff, "record: parent does not precede node");
    tracked = tracked || nodes_[p].tracked;
  }
  Node& node = nodes_.emplace_back();
  node.shape = std::move(shape);
  node.owned = std::move(values);
  node.value = node.owned;
  node.parents = std::move(parents);
  node.tracked = tracked;
  if (tracked) node.backward = std::move(backward);
  return {this, self};
}

void Tape::backward(const Tensor& scalar) {
  if (&scalar.tape() != this) throw Error(ErrorKind::Autodiff, "backward: tensor from another tape");
  const std::size_t root = scalar.id();
  const Node& out = nodes_[root];
  if (!out.shape.empty() || out.value.size() != 1) {
    throw Error(ErrorKind::Autodiff, "backward requires a 0-dim scalar");
  }
  if (std::abs(out.value[0].imag()) >= 1e-12) {
    throw Error(ErrorKind::Autodiff, "backward requires a real-valued scalar");
  }
  if (!out.tracked) return;

  for (std::size_t id = 0; id <= root; ++id) {
    Node& node = nodes_[id];
    if (!node.tracked || node.is_leaf) continue;
    node.grad_owned.assign(node.value.size(), cplx{});
    node.grad = node.grad_owned;
  }
  if (nodes_[root].is_leaf) {
    nodes_[root].grad[0] += 1.0;
    return;
  }
  nodes_[root].grad[0] = 1.0;
  for (std::size_t id = root + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.tracked && node.backward) node.backward(*this, id);
  }
}

Tensor matvec(const Tensor& m, const Tensor& v) {
  const auto& ms = m.shape();
  if (ms.size() != 2 || v.shape().size() != 1 || ms[1] != v.shape()[0]) {
    throw dim_error("matvec: inner dimensions disagree");
  }
  const std::size_t rows = ms[0], cols = ms[1];
  auto mv = m.values();
  auto vv = v.values();
  std::vector<cplx> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    cplx acc{};
    for (std::size_t c = 0; c < cols; ++c) acc += mv[r * cols + c] * vv[c];
    out[r] = acc;
  }
  const std::size_t mi = m.id(), vi = v.id();
  return m.tape().record({rows}, std::move(out), {mi, vi}, [=](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    auto mvals = t.value(mi);
    auto vvals = t.value(vi);
    with_grad(t, mi, [&](std::span<cplx> gm) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gm[r * cols + c] += g[r] * std::conj(vvals[c]);
    });
    with_grad(t, vi, [&](std::span<cplx> gv) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gv[c] += std::conj(mvals[r * cols + c]) * g[r];
    });
  });
}

Tensor weighted_sum(const Tensor& coeffs, std::span<const Tensor> terms) {
  if (terms.empty()) throw Error(ErrorKind::Arity, "weighted_sum: empty term list");
  if (coeffs.shape().size() != 1 || coeffs.size() != terms.size()) {
    throw Error(ErrorKind::Arity, "weighted_sum: coefficient count differs from term count");
  }
  const Shape shape = terms[0].shape();
  for (const auto& term : terms) {
    if (term.shape() != shape) throw dim_error("weighted_sum: terms differ in shape");
  }
  const std::size_t len = terms[0].size();
  auto cv = coeffs.values();
  std::vector<cplx> out(len);
  std::vector<std::size_t> parents{coeffs.id()};
  for (std::size_t j = 0; j < terms.size(); ++j) {
    auto tv = terms[j].values();
    for (std::size_t i = 0; i < len; ++i) out[i] += cv[j] * tv[i];
    parents.push_back(terms[j].id());
  }
  return coeffs.tape().record(shape, std::move(out), parents,
                              [parents, len](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    const std::size_t ci = parents[0];
    auto cvals = t.value(ci);
    for (std::size_t j = 1; j < parents.size(); ++j) {
      const std::size_t ti = parents[j];
      auto tvals = t.value(ti);
      with_grad(t, ci, [&](std::span<cplx> gc) {
        cplx acc{};
        for (std::size_t i = 0; i < len; ++i) acc += g[i] * std::conj(tvals[i]);
        gc[j - 1] += acc;
      });
      with_grad(t, ti, [&](std::span<cplx> gt) {
        const cplx w = std::conj(cvals[j - 1]);
        for (std::size_t i = 0; i < len; ++i) gt[i] += w * g[i];
      });
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto av = a.values(), bv = b.values();
  std::vector<cplx> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(a.shape(), std::move(out), {ai, bi}, [=](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    with_grad(t, ai, [&](std::span<cplx> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
    with_grad(t, bi, [&](std::span<cplx> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i]; });
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto av = a.values(), bv = b.values();
  std::vector<cplx> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(a.shape(), std::move(out), {ai, bi}, [=](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    with_grad(t, ai, [&](std::span<cplx> ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
    with_grad(t, bi, [&](std::span<cplx> gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i]; });
  });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  auto av = a.values(), bv = b.values();
  std::vector<cplx> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(a.shape(), std::move(out), {ai, bi}, [=](Tape& t, std::size_t self) {
    auto g = t.grad(self);
    auto avals = t.value(ai), bvals = t.value(bi);
    with_grad(t, ai, [&](std::span<cplx> ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += std::conj(bvals[i]) * g[i];
    });
    with_grad(t, bi, [&](std::span<cplx> gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += std::conj(avals[i]) * g[i];
    });
  });
}

Tensor scale(const Tensor& t, cplx factor) {
  auto tv = t.values();
  std::vector<cplx> out(tv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * tv[i];
  const std::size_t ti = t.id();
  return t.tape().record(t.shape(), std::move(out), {ti}, [=](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += std::conj(factor) * g[i];
    });
  });
}

Tensor mul(const Tensor& scalar, const Tensor& t) {
  require_scalar(scalar, "mul");
  const cplx s = scalar.item();
  auto tv = t.values();
  std::vector<cplx> out(tv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * tv[i];
  const std::size_t si = scalar.id(), ti = t.id();
  return t.tape().record(t.shape(), std::move(out), {si, ti}, [=](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto tvals = tp.value(ti);
    const cplx sv = tp.value(si)[0];
    with_grad(tp, si, [&](std::span<cplx> gs) {
      cplx acc{};
      for (std::size_t i = 0; i < g.size(); ++i) acc += std::conj(tvals[i]) * g[i];
      gs[0] += acc;
    });
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += std::conj(sv) * g[i];
    });
  });
}

Tensor mul_const(const Tensor& t, std::span<const cplx> factors) {
  if (factors.size() != t.size()) throw dim_error("mul_const: factor count differs from size");
  std::vector<cplx> f(factors.begin(), factors.end());
  auto tv = t.values();
  std::vector<cplx> out(tv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] * tv[i];
  const std::size_t ti = t.id();
  return t.tape().record(t.shape(), std::move(out), {ti},
                         [ti, f = std::move(f)](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += std::conj(f[i]) * g[i];
    });
  });
}

Tensor conj(const Tensor& t) {
  auto tv = t.values();
  std::vector<cplx> out(tv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::conj(tv[i]);
  const std::size_t ti = t.id();
  return t.tape().record(t.shape(), std::move(out), {ti}, [=](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += std::conj(g[i]);
    });
  });
}

namespace {

// y_i = f(Re t_i), real-valued, with derivative df. G_t = Re(G_y) * f'(Re t).
template <typename F, typename DF>
Tensor real_elementwise(const Tensor& t, F f, DF df) {
  auto tv = t.values();
  std::vector<cplx> out(tv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(tv[i].real());
  const std::size_t ti = t.id();
  return t.tape().record(t.shape(), std::move(out), {ti}, [=](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto tvals = tp.value(ti);
    auto yvals = tp.value(self);
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        gt[i] += g[i].real() * df(tvals[i].real(), yvals[i].real());
      }
    });
  });
}

}  // namespace

Tensor real(const Tensor& t) {
  return real_elementwise(t, [](double x) { return x; }, [](double, double) { return 1.0; });
}

Tensor tanh(const Tensor& t) {
  return real_elementwise(
      t, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& t) {
  return real_elementwise(
      t, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor pow_real(const Tensor& t, double p) {
  return real_elementwise(
      t, [p](double x) { return std::pow(x, p); },
      [p](double x, double) { return p * std::pow(x, p - 1.0); });
}

Tensor abs(const Tensor& t) {
  auto tv = t.values();
  std::vector<cplx> out(tv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(tv[i]);
  const std::size_t ti = t.id();
  return t.tape().record(t.shape(), std::move(out), {ti}, [=](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto tvals = tp.value(ti);
    auto yvals = tp.value(self);
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double mag = yvals[i].real();
        if (mag > 0.0) gt[i] += g[i].real() * tvals[i] / mag;
      }
    });
  });
}

Tensor sum(const Tensor& t) {
  cplx acc{};
  for (auto v : t.values()) acc += v;
  const std::size_t ti = t.id();
  return t.tape().record({}, {acc}, {ti}, [=](Tape& tp, std::size_t self) {
    const cplx g = tp.grad(self)[0];
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (auto& x : gt) x += g;
    });
  });
}

Tensor squared_norm(const Tensor& t) {
  double acc = 0.0;
  for (auto v : t.values()) acc += std::norm(v);
  const std::size_t ti = t.id();
  return t.tape().record({}, {acc}, {ti}, [=](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0].real();
    auto tvals = tp.value(ti);
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += 2.0 * g * tvals[i];
    });
  });
}

Tensor gather(const Tensor& t, std::span<const std::size_t> indices) {
  auto tv = t.values();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  std::vector<cplx> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= tv.size()) throw Error(ErrorKind::Index, "gather: index out of range");
    out[k] = tv[idx[k]];
  }
  const std::size_t ti = t.id(), count = idx.size();
  return t.tape().record({count}, std::move(out), {ti},
                         [ti, idx = std::move(idx)](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t k = 0; k < idx.size(); ++k) gt[idx[k]] += g[k];
    });
  });
}

Tensor element(const Tensor& t, std::size_t index) {
  auto tv = t.values();
  if (index >= tv.size()) throw Error(ErrorKind::Index, "element: index out of range");
  const std::size_t ti = t.id();
  return t.tape().record({}, {tv[index]}, {ti}, [=](Tape& tp, std::size_t self) {
    const cplx g = tp.grad(self)[0];
    with_grad(tp, ti, [&](std::span<cplx> gt) { gt[index] += g; });
  });
}

Tensor stack(std::span<const Tensor> scalars) {
  if (scalars.empty()) throw Error(ErrorKind::Arity, "stack: no inputs");
  std::vector<cplx> out;
  std::vector<std::size_t> parents;
  for (const auto& s : scalars) {
    require_scalar(s, "stack");
    out.push_back(s.item());
    parents.push_back(s.id());
  }
  const std::size_t n = out.size();
  return scalars[0].tape().record({n}, std::move(out), parents,
                                  [parents](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    for (std::size_t k = 0; k < parents.size(); ++k) {
      with_grad(tp, parents[k], [&](std::span<cplx> gp) { gp[0] += g[k]; });
    }
  });
}

namespace {

std::vector<double> softmax_values(std::span<const cplx> x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (auto v : x) mx = std::max(mx, v.real());
  std::vector<double> p(x.size());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(x[i].real() - mx);
    z += p[i];
  }
  for (auto& v : p) v /= z;
  return p;
}

}  // namespace

Tensor softmax(const Tensor& t) {
  if (t.shape().size() != 1 || t.size() == 0) throw dim_error("softmax: expected a non-empty vector");
  auto p = softmax_values(t.values());
  std::vector<cplx> out(p.begin(), p.end());
  const std::size_t ti = t.id();
  return t.tape().record(t.shape(), std::move(out), {ti}, [=](Tape& tp, std::size_t self) {
    auto g = tp.grad(self);
    auto y = tp.value(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += y[i].real() * g[i].real();
    with_grad(tp, ti, [&](std::span<cplx> gt) {
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += y[i].real() * (g[i].real() - dot);
    });
  });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::size_t label) {
  if (logits.shape().size() != 1) throw dim_error("softmax_cross_entropy: expected a vector");
  if (label >= logits.size()) throw Error(ErrorKind::Label, "label exceeds class count");
  auto p = softmax_values(logits.values());
  const double loss = -std::log(std::max(p[label], std::numeric_limits<double>::min()));
  const std::size_t li = logits.id();
  return logits.tape().record({}, {loss}, {li}, [=](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0].real();
    with_grad(tp, li, [&](std::span<cplx> gl) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        gl[i] += g * (p[i] - (i == label ? 1.0 : 0.0));
      }
    });
  });
}

}  // namespace claqs::ad
