#pragma once

// LCU + polynomial token mixer over one window of token circuits.
//
//   M(b~)   = sum_j b~_j U_j,        b~ = b / sum_k |b_k|
//   P_c(M)  = sum_k c_k M^k
//   |psi>   = U_FF(phi) P_c(M)|0^q> / ||P_c(M)|0^q>||
//
// M is never materialized: each power is one pass over the window's token
// circuits plus a weighted sum.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "autodiff.hpp"
#include "quantum.hpp"

namespace claqs::mix {

using ad::Tensor;
using qsim::Statevector;

/// Layout shared by every window in a model.
struct MixerShape {
  std::size_t qubits = 8;
  std::size_t layers = 3;     // embedding ansatz depth
  std::size_t ff_layers = 6;  // U_FF depth
  bool normalize_lcu = true;
};

struct MixerParams {
  Tensor b;    // [n], raw LCU coefficients
  Tensor c;    // [d+1], c_k multiplies M^k
  Tensor phi;  // [4 * ff_layers * q], real
};

struct MixerOutput {
  Tensor features;  // [3q] real XYZ readout
  Tensor pre_norm;  // 0-dim, ||P_c(M)|0^q>||^2
  Statevector state;
  Tensor coeffs;    // coefficients that entered M (b~ when normalizing)
};

/// Zeroes masked entries and divides by the l1 norm of the rest. An empty mask
/// means every position is active.
Tensor l1_normalize(const Tensor& b, std::span<const std::uint8_t> mask = {});

/// sum_j coeffs_j U_j s over active positions. `token_angles[j]` parameterizes U_j.
Statevector apply_M(const Statevector& s, const Tensor& coeffs,
                    std::span<const Tensor> token_angles, std::size_t layers,
                    std::span<const std::uint8_t> mask = {});

/// P_c(M)|0^q>, by the chain v_0 = |0^q>, v_k = M v_{k-1}; d calls to apply_M.
Statevector apply_polynomial(std::size_t qubits, const Tensor& coeffs,
                             std::span<const Tensor> token_angles, std::size_t layers,
                             const Tensor& c, std::span<const std::uint8_t> mask = {});

Tensor mask_coefficients(const Tensor& b, std::span<const std::uint8_t> mask);

MixerOutput mix_window(std::span<const Tensor> token_angles, const MixerParams& params,
                       const MixerShape& shape, std::span<const std::uint8_t> mask = {},
                       std::optional<std::size_t> window_id = std::nullopt);

}  // namespace claqs::mix
