#include "mixer.hpp"

#include <cmath>
#include <string>

namespace claqs::mix {

using ad::cplx;

namespace {

bool active(std::span<const std::uint8_t> mask, std::size_t j) { return mask.empty() || mask[j]; }

void check_mask(std::span<const std::uint8_t> mask, std::size_t n) {
  if (!mask.empty() && mask.size() != n) {
    throw Error(ErrorKind::Arity, "mask length differs from window length");
  }
}

}  // namespace

Tensor l1_normalize(const Tensor& b, std::span<const std::uint8_t> mask) {
  const std::size_t n = b.size();
  check_mask(mask, n);
  auto bv = b.values();
  double total = 0.0;
  bool any = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (!active(mask, j)) continue;
    any = true;
    total += std::abs(bv[j]);
  }
  if (!any) throw Error(ErrorKind::EmptyWindow, "every window position is masked");
  if (total <= 1e-12) throw Error(ErrorKind::DegenerateCoefficient, "sum |b| below 1e-12");

  std::vector<bool> keep(n);
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    keep[j] = active(mask, j);
    out[j] = keep[j] ? bv[j] / total : cplx{};
  }
  const std::size_t bi = b.id();
  return b.tape().record(b.shape(), std::move(out), {bi},
                         [bi, total, keep = std::move(keep)](ad::Tape& tp, std::size_t self) {
    if (!tp.tracked(bi)) return;
    auto g = tp.grad(self);
    auto raw = tp.value(bi);
    double alpha = 0.0;
    for (std::size_t j = 0; j < raw.size(); ++j) {
      if (keep[j]) alpha += (std::conj(g[j]) * raw[j]).real();
    }
    alpha /= total * total;
    auto gb = tp.grad(bi);
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (!keep[k]) continue;
      const double mag = std::abs(raw[k]);
      const cplx unit = mag > 0.0 ? raw[k] / mag : cplx{};
      gb[k] += g[k] / total - alpha * unit;
    }
  });
}

Tensor mask_coefficients(const Tensor& b, std::span<const std::uint8_t> mask) {
  check_mask(mask, b.size());
  if (mask.empty()) return b;
  std::vector<cplx> factors(b.size());
  bool any = false;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    factors[j] = mask[j] ? 1.0 : 0.0;
    any = any || mask[j];
  }
  if (!any) throw Error(ErrorKind::EmptyWindow, "every window position is masked");
  return ad::mul_const(b, factors);
}

Statevector apply_M(const Statevector& s, const Tensor& coeffs,
                    std::span<const Tensor> token_angles, std::size_t layers,
                    std::span<const std::uint8_t> mask) {
  const std::size_t n = coeffs.size();
  if (token_angles.size() != n) {
    throw Error(ErrorKind::Arity, "token count " + std::to_string(token_angles.size()) +
                                      " differs from coefficient count " + std::to_string(n));
  }
  check_mask(mask, n);
  std::vector<std::size_t> used;
  std::vector<Tensor> terms;
  for (std::size_t j = 0; j < n; ++j) {
    if (!active(mask, j)) continue;
    used.push_back(j);
    terms.push_back(qsim::apply_ansatz14(s, token_angles[j], layers).amps);
  }
  if (terms.empty()) throw Error(ErrorKind::EmptyWindow, "every window position is masked");
  const Tensor weights = used.size() == n ? coeffs : ad::gather(coeffs, used);
  return {s.qubits, ad::weighted_sum(weights, terms)};
}

Statevector apply_polynomial(std::size_t qubits, const Tensor& coeffs,
                             std::span<const Tensor> token_angles, std::size_t layers,
                             const Tensor& c, std::span<const std::uint8_t> mask) {
  if (c.shape().size() != 1 || c.size() < 2) {
    throw Error(ErrorKind::Shape, "polynomial degree must be at least 1");
  }
  const std::size_t degree = c.size() - 1;
  std::vector<Tensor> powers;
  powers.reserve(degree + 1);
  Statevector v = qsim::zero_state(coeffs.tape(), qubits);
  powers.push_back(v.amps);
  for (std::size_t k = 1; k <= degree; ++k) {
    v = apply_M(v, coeffs, token_angles, layers, mask);
    powers.push_back(v.amps);
  }
  return {qubits, ad::weighted_sum(c, powers)};
}

MixerOutput mix_window(std::span<const Tensor> token_angles, const MixerParams& params,
                       const MixerShape& shape, std::span<const std::uint8_t> mask,
                       std::optional<std::size_t> window_id) {
  const Tensor coeffs = shape.normalize_lcu ? l1_normalize(params.b, mask)
                                            : mask_coefficients(params.b, mask);
  const Statevector raw =
      apply_polynomial(shape.qubits, coeffs, token_angles, shape.layers, params.c, mask);
  const Tensor pre_norm = ad::squared_norm(raw.amps);
  if (pre_norm.item().real() < 1e-12) {
    std::string where = window_id ? " in window " + std::to_string(*window_id) : std::string();
    throw Error(ErrorKind::CollapsedState, "pre_norm below 1e-12" + where);
  }
  const Tensor inv = ad::pow_real(pre_norm, -0.5);
  const Statevector normalized{shape.qubits, ad::mul(inv, raw.amps)};
  const Statevector out = qsim::apply_ansatz14(normalized, params.phi, shape.ff_layers);
  return {qsim::pauli_expectations(out), pre_norm, out, coeffs};
}

}  // namespace claqs::mix
