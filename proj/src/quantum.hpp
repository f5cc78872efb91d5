#pragma once

// Statevector simulation of the q-qubit data register. Basis indices are
// little-endian: qubit k is bit k of the index.
//
// Gate conventions:
//   RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
//   RX(t) = [[cos t/2, -i sin t/2], [-i sin t/2, cos t/2]]
//   CRX applies RX to the target on the control=1 subspace.

#include <cstddef>
#include <span>
#include <vector>

#include "autodiff.hpp"

namespace claqs::qsim {

using ad::cplx;
using ad::Tensor;

inline constexpr std::size_t kMaxQubits = 14;

struct Statevector {
  std::size_t qubits = 0;
  Tensor amps;  // length 2^qubits
};

enum class GateKind { RY, CRX };

struct Gate {
  GateKind kind;
  std::size_t control;  // unused for RY
  std::size_t target;
  std::size_t angle_index;
};

/// Number of angles an ansatz-14 stack consumes: 4 * layers * qubits.
std::size_t ansatz_angle_count(std::size_t qubits, std::size_t layers);

/// Gate order of the ansatz-14 stack. Each layer occupies a block of 4q angles:
/// RY on every qubit, CRX ring i -> (i+1) mod q for i = q-1..0, RY on every
/// qubit, CRX ring i -> (i-1+q) mod q for i = 0..q-1.
std::vector<Gate> ansatz_schedule(std::size_t qubits, std::size_t layers);

namespace kernel {

void apply_ry(std::span<cplx> amps, std::size_t qubit, double angle);
void apply_crx(std::span<cplx> amps, std::size_t control, std::size_t target, double angle);
void apply_gate(std::span<cplx> amps, const Gate& gate, double angle);
void apply_ansatz(std::span<cplx> amps, std::span<const Gate> schedule,
                  std::span<const double> angles);

/// Dense 2^q x 2^q matrix (row-major) of the ansatz, obtained by running every
/// basis state through the simulator.
std::vector<cplx> ansatz_unitary(std::size_t qubits, std::size_t layers,
                                 std::span<const double> angles);

}  // namespace kernel

Statevector zero_state(ad::Tape& tape, std::size_t qubits);
Statevector from_amplitudes(ad::Tape& tape, std::size_t qubits, std::vector<cplx> amps);

/// Single gates, differentiable w.r.t. the state and the 0-dim angle tensor.
Statevector apply_ry(const Statevector& s, std::size_t qubit, const Tensor& angle);
Statevector apply_ry(const Statevector& s, std::size_t qubit, double angle);
Statevector apply_crx(const Statevector& s, std::size_t control, std::size_t target,
                      const Tensor& angle);
Statevector apply_crx(const Statevector& s, std::size_t control, std::size_t target, double angle);

/// Runs the ansatz-14 stack. `angles` must be real-valued with 4*layers*q entries.
/// The backward pass uses the adjoint method: the state is uncomputed gate by
/// gate, so no intermediate states are stored.
Statevector apply_ansatz14(const Statevector& s, const Tensor& angles, std::size_t layers);

/// <X_i>, <Y_i>, <Z_i> of the normalized input, ordered [X_0..X_{q-1}, Y_0.., Z_0..].
Tensor pauli_expectations(const Statevector& s);

}  // namespace claqs::qsim
