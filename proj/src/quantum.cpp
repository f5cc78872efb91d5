#include "quantum.hpp"

#include <cmath>
#include <string>

namespace claqs::qsim {

namespace {

struct Mat2 {
  cplx m00, m01, m10, m11;
};

Mat2 ry_matrix(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {c, -s, s, c};
}

// d/dtheta of RY
Mat2 ry_derivative(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {-0.5 * s, -0.5 * c, 0.5 * c, -0.5 * s};
}

Mat2 rx_matrix(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {c, cplx(0, -s), cplx(0, -s), c};
}

Mat2 rx_derivative(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {-0.5 * s, cplx(0, -0.5 * c), cplx(0, -0.5 * c), -0.5 * s};
}

Mat2 gate_matrix(GateKind kind, double angle) {
  return kind == GateKind::RY ? ry_matrix(angle) : rx_matrix(angle);
}

Mat2 gate_derivative(GateKind kind, double angle) {
  return kind == GateKind::RY ? ry_derivative(angle) : rx_derivative(angle);
}

// Visits every amplitude pair (i0, i1) differing in the target bit, restricted
// to indices whose control bit is set when `controlled` is true.
template <typename Fn>
void for_each_pair(std::size_t dim, std::size_t target, bool controlled, std::size_t control,
                   Fn&& fn) {
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t cmask = controlled ? (std::size_t{1} << control) : 0;
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i0 = base; i0 < base + stride; ++i0) {
      if ((i0 & cmask) != cmask) continue;
      fn(i0, i0 + stride);
    }
  }
}

void apply_mat2(std::span<cplx> amps, const Gate& gate, const Mat2& m) {
  for_each_pair(amps.size(), gate.target, gate.kind == GateKind::CRX, gate.control,
                [&](std::size_t i0, std::size_t i1) {
                  const cplx a0 = amps[i0], a1 = amps[i1];
                  amps[i0] = m.m00 * a0 + m.m01 * a1;
                  amps[i1] = m.m10 * a0 + m.m11 * a1;
                });
}

// Re <lambda | D psi> over the pairs the gate touches.
double derivative_overlap(std::span<const cplx> lambda, std::span<const cplx> psi,
                          const Gate& gate, const Mat2& d) {
  double acc = 0.0;
  for_each_pair(psi.size(), gate.target, gate.kind == GateKind::CRX, gate.control,
                [&](std::size_t i0, std::size_t i1) {
                  const cplx a0 = psi[i0], a1 = psi[i1];
                  acc += (std::conj(lambda[i0]) * (d.m00 * a0 + d.m01 * a1) +
                          std::conj(lambda[i1]) * (d.m10 * a0 + d.m11 * a1))
                             .real();
                });
  return acc;
}

void check_qubit_count(std::size_t qubits) {
  if (qubits < 1 || qubits > kMaxQubits) {
    throw Error(ErrorKind::Capacity,
                "qubit count " + std::to_string(qubits) + " outside [1, " +
                    std::to_string(kMaxQubits) + "]");
  }
}

void check_state(const Statevector& s) {
  check_qubit_count(s.qubits);
  if (s.amps.size() != (std::size_t{1} << s.qubits)) {
    throw Error(ErrorKind::Dimension, "statevector length is not 2^q");
  }
}

Statevector apply_single(const Statevector& s, const Gate& gate, const Tensor& angle) {
  check_state(s);
  if (angle.size() != 1) throw Error(ErrorKind::Shape, "gate angle must be a scalar");
  const double theta = angle.item().real();
  std::vector<cplx> out(s.amps.values().begin(), s.amps.values().end());
  apply_mat2(out, gate, gate_matrix(gate.kind, theta));
  const std::size_t si = s.amps.id(), ai = angle.id();
  Tensor result = s.amps.tape().record(
      s.amps.shape(), std::move(out), {si, ai}, [=](ad::Tape& tp, std::size_t self) {
        auto g = tp.grad(self);
        if (tp.tracked(ai)) {
          tp.grad(ai)[0] +=
              derivative_overlap(g, tp.value(si), gate, gate_derivative(gate.kind, theta));
        }
        if (tp.tracked(si)) {
          std::vector<cplx> back(g.begin(), g.end());
          apply_mat2(back, gate, gate_matrix(gate.kind, -theta));
          auto gs = tp.grad(si);
          for (std::size_t i = 0; i < back.size(); ++i) gs[i] += back[i];
        }
      });
  return {s.qubits, result};
}

}  // namespace

std::size_t ansatz_angle_count(std::size_t qubits, std::size_t layers) {
  return 4 * layers * qubits;
}

std::vector<Gate> ansatz_schedule(std::size_t qubits, std::size_t layers) {
  std::vector<Gate> gates;
  gates.reserve(ansatz_angle_count(qubits, layers));
  const std::size_t q = qubits;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t block = l * 4 * q;
    for (std::size_t i = 0; i < q; ++i) gates.push_back({GateKind::RY, 0, i, block + i});
    for (std::size_t i = q; i-- > 0;) {
      gates.push_back({GateKind::CRX, i, (i + 1) % q, block + q + i});
    }
    for (std::size_t i = 0; i < q; ++i) gates.push_back({GateKind::RY, 0, i, block + 2 * q + i});
    for (std::size_t i = 0; i < q; ++i) {
      gates.push_back({GateKind::CRX, i, (i + q - 1) % q, block + 3 * q + i});
    }
  }
  return gates;
}

namespace kernel {

void apply_ry(std::span<cplx> amps, std::size_t qubit, double angle) {
  apply_mat2(amps, {GateKind::RY, 0, qubit, 0}, ry_matrix(angle));
}

void apply_crx(std::span<cplx> amps, std::size_t control, std::size_t target, double angle) {
  apply_mat2(amps, {GateKind::CRX, control, target, 0}, rx_matrix(angle));
}

void apply_gate(std::span<cplx> amps, const Gate& gate, double angle) {
  apply_mat2(amps, gate, gate_matrix(gate.kind, angle));
}

void apply_ansatz(std::span<cplx> amps, std::span<const Gate> schedule,
                  std::span<const double> angles) {
  for (const auto& gate : schedule) apply_gate(amps, gate, angles[gate.angle_index]);
}

std::vector<cplx> ansatz_unitary(std::size_t qubits, std::size_t layers,
                                 std::span<const double> angles) {
  check_qubit_count(qubits);
  if (angles.size() != ansatz_angle_count(qubits, layers)) {
    throw Error(ErrorKind::Shape, "ansatz angle count mismatch");
  }
  const std::size_t dim = std::size_t{1} << qubits;
  const auto schedule = ansatz_schedule(qubits, layers);
  std::vector<cplx> u(dim * dim);
  std::vector<cplx> column(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    std::fill(column.begin(), column.end(), cplx{});
    column[c] = 1.0;
    apply_ansatz(column, schedule, angles);
    for (std::size_t r = 0; r < dim; ++r) u[r * dim + c] = column[r];
  }
  return u;
}

}  // namespace kernel

Statevector zero_state(ad::Tape& tape, std::size_t qubits) {
  check_qubit_count(qubits);
  const std::size_t dim = std::size_t{1} << qubits;
  std::vector<cplx> amps(dim);
  amps[0] = 1.0;
  return {qubits, tape.constant({dim}, std::move(amps))};
}

Statevector from_amplitudes(ad::Tape& tape, std::size_t qubits, std::vector<cplx> amps) {
  check_qubit_count(qubits);
  if (amps.size() != (std::size_t{1} << qubits)) {
    throw Error(ErrorKind::Dimension, "amplitude count is not 2^q");
  }
  const std::size_t n = amps.size();
  return {qubits, tape.constant({n}, std::move(amps))};
}

Statevector apply_ry(const Statevector& s, std::size_t qubit, const Tensor& angle) {
  if (qubit >= s.qubits) throw Error(ErrorKind::Index, "RY target qubit out of range");
  return apply_single(s, {GateKind::RY, 0, qubit, 0}, angle);
}

Statevector apply_ry(const Statevector& s, std::size_t qubit, double angle) {
  return apply_ry(s, qubit, s.amps.tape().scalar(angle));
}

Statevector apply_crx(const Statevector& s, std::size_t control, std::size_t target,
                      const Tensor& angle) {
  if (control >= s.qubits || target >= s.qubits) {
    throw Error(ErrorKind::Index, "CRX qubit index out of range");
  }
  if (control == target) throw Error(ErrorKind::Wiring, "CRX control equals target");
  return apply_single(s, {GateKind::CRX, control, target, 0}, angle);
}

Statevector apply_crx(const Statevector& s, std::size_t control, std::size_t target,
                      double angle) {
  return apply_crx(s, control, target, s.amps.tape().scalar(angle));
}

Statevector apply_ansatz14(const Statevector& s, const Tensor& angles, std::size_t layers) {
  check_state(s);
  const std::size_t q = s.qubits;
  if (q < 2) throw Error(ErrorKind::Wiring, "ansatz requires an entangling ring (q >= 2)");
  if (angles.shape().size() != 1 || angles.size() != ansatz_angle_count(q, layers)) {
    throw Error(ErrorKind::Shape, "ansatz expects " + std::to_string(ansatz_angle_count(q, layers)) +
                                      " angles, got " + std::to_string(angles.size()));
  }
  std::vector<double> theta(angles.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (angles.values()[i].imag() != 0.0) {
      throw Error(ErrorKind::Shape, "ansatz angles must be real-valued");
    }
    theta[i] = angles.values()[i].real();
  }
  auto schedule = ansatz_schedule(q, layers);
  std::vector<cplx> out(s.amps.values().begin(), s.amps.values().end());
  kernel::apply_ansatz(out, schedule, theta);

  const std::size_t si = s.amps.id(), ai = angles.id();
  Tensor result = s.amps.tape().record(
      s.amps.shape(), std::move(out), {si, ai},
      [si, ai, theta = std::move(theta), schedule = std::move(schedule)](ad::Tape& tp,
                                                                        std::size_t self) {
        auto g = tp.grad(self);
        auto y = tp.value(self);
        std::vector<cplx> psi(y.begin(), y.end());
        std::vector<cplx> lambda(g.begin(), g.end());
        const bool want_angles = tp.tracked(ai);
        std::vector<double> dtheta(want_angles ? theta.size() : 0);
        for (std::size_t k = schedule.size(); k-- > 0;) {
          const Gate& gate = schedule[k];
          const double t = theta[gate.angle_index];
          apply_mat2(psi, gate, gate_matrix(gate.kind, -t));
          if (want_angles) {
            dtheta[gate.angle_index] +=
                derivative_overlap(lambda, psi, gate, gate_derivative(gate.kind, t));
          }
          apply_mat2(lambda, gate, gate_matrix(gate.kind, -t));
        }
        if (want_angles) {
          auto ga = tp.grad(ai);
          for (std::size_t i = 0; i < dtheta.size(); ++i) ga[i] += dtheta[i];
        }
        if (tp.tracked(si)) {
          auto gs = tp.grad(si);
          for (std::size_t i = 0; i < lambda.size(); ++i) gs[i] += lambda[i];
        }
      });
  return {q, result};
}

Tensor pauli_expectations(const Statevector& s) {
  check_state(s);
  const std::size_t q = s.qubits;
  auto psi = s.amps.values();
  const std::size_t dim = psi.size();
  double norm = 0.0;
  for (auto a : psi) norm += std::norm(a);
  if (norm <= 1e-12) throw Error(ErrorKind::DegenerateState, "state norm below 1e-12");

  std::vector<cplx> out(3 * q);
  for (std::size_t k = 0; k < q; ++k) {
    double x = 0.0, y = 0.0, z = 0.0;
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t i0 = 0; i0 < dim; ++i0) {
      if (i0 & bit) {
        z -= std::norm(psi[i0]);
        continue;
      }
      const std::size_t i1 = i0 | bit;
      const cplx w = std::conj(psi[i0]) * psi[i1];
      x += 2.0 * w.real();
      y += 2.0 * w.imag();
      z += std::norm(psi[i0]);
    }
    out[k] = x / norm;
    out[q + k] = y / norm;
    out[2 * q + k] = z / norm;
  }

  const std::size_t si = s.amps.id();
  return s.amps.tape().record({3 * q}, std::move(out), {si}, [=](ad::Tape& tp, std::size_t self) {
    if (!tp.tracked(si)) return;
    auto g = tp.grad(self);
    auto f = tp.value(self);
    auto amps = tp.value(si);
    auto gs = tp.grad(si);
    // d<P>/d conj(psi) scaled by 2: 2 (P psi - <P> psi) / N
    for (std::size_t k = 0; k < q; ++k) {
      const std::size_t bit = std::size_t{1} << k;
      const double gx = g[k].real(), gy = g[q + k].real(), gz = g[2 * q + k].real();
      const double fx = f[k].real(), fy = f[q + k].real(), fz = f[2 * q + k].real();
      for (std::size_t i = 0; i < dim; ++i) {
        const bool one = (i & bit) != 0;
        const cplx partner = amps[i ^ bit];
        const cplx xpsi = partner;
        const cplx ypsi = one ? cplx(0, 1) * partner : cplx(0, -1) * partner;
        const cplx zpsi = one ? -amps[i] : amps[i];
        const cplx total = gx * (xpsi - fx * amps[i]) + gy * (ypsi - fy * amps[i]) +
                           gz * (zpsi - fz * amps[i]);
        gs[i] += 2.0 * total / norm;
      }
    }
  });
}

}  // namespace claqs::qsim
