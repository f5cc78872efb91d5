#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "autodiff.hpp"
#include "rng.hpp"

namespace testing {

using claqs::ad::cplx;
using claqs::ad::Shape;
using claqs::ad::Tape;
using claqs::ad::Tensor;

inline std::vector<cplx> random_complex(claqs::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<cplx> v(n);
  for (auto& x : v) {
    const double re = rng.uniform(-scale, scale);
    x = {re, rng.uniform(-scale, scale)};
  }
  return v;
}

inline std::vector<cplx> random_real(claqs::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<cplx> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

struct Input {
  Shape shape;
  std::vector<cplx> values;
};

using Builder = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

/// L = sum_i Re(w_i y_i): a real scalar touching every output component.
inline Tensor project(const Tensor& y, const std::vector<cplx>& w) {
  Tape& t = y.tape();
  return claqs::ad::real(claqs::ad::sum(claqs::ad::hadamard(t.constant(y.shape(), w), y)));
}

/// Largest per-coordinate error between tape gradients and central
/// differences, relative to max(|analytic|, |numeric|, floor).
inline double fd_error(const Builder& build, std::vector<Input> inputs, double h = 1e-5,
                       double floor = 1e-4) {
  std::vector<std::vector<cplx>> grads;
  for (const auto& in : inputs) grads.emplace_back(in.values.size());
  {
    Tape tape;
    std::vector<Tensor> leaves;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      leaves.push_back(tape.leaf(inputs[i].shape, inputs[i].values, grads[i]));
    }
    tape.backward(build(tape, leaves));
  }
  auto eval = [&] {
    Tape tape;
    std::vector<Tensor> leaves;
    for (const auto& in : inputs) leaves.push_back(tape.view(in.shape, in.values));
    return build(tape, leaves).item().real();
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t k = 0; k < inputs[i].values.size(); ++k) {
      for (int part = 0; part < 2; ++part) {
        const cplx saved = inputs[i].values[k];
        const cplx step = part == 0 ? cplx(h, 0) : cplx(0, h);
        inputs[i].values[k] = saved + step;
        const double up = eval();
        inputs[i].values[k] = saved - step;
        const double down = eval();
        inputs[i].values[k] = saved;
        const double numeric = (up - down) / (2 * h);
        const double analytic = part == 0 ? grads[i][k].real() : grads[i][k].imag();
        const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
      }
    }
  }
  return worst;
}

inline double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double d = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace testing
