#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "config.hpp"
#include "data.hpp"
#include "mixer.hpp"
#include "rng.hpp"

namespace claqs::model {

using ad::cplx;
using ad::Tensor;

struct Param {
  std::string name;
  std::string group;
  ad::Shape shape;
  std::vector<cplx> value;
  bool real_valued = true;
  bool decay = true;  // AdamW weight decay applies

  std::size_t real_count() const { return value.size() * (real_valued ? 1 : 2); }
};

/// Trainable tensors in a fixed order:
///   embeddings [V x d_e], W_E [4lq x d_e], theta [4lq] (angle offset),
///   b [n], c [d+1], phi [4 l_ff q], head.w1 [h x 3q], head.b1 [h],
///   head.w2 [C x h], head.b2 [C], and attention.score [3q] for attention pooling.
struct Parameters {
  std::vector<Param> list;

  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  std::size_t index(const std::string& name) const;
  std::vector<std::string> groups() const;
  std::size_t real_count() const;
};

struct Gradients {
  std::vector<std::vector<cplx>> per_param;

  explicit Gradients(const Parameters& params);
  void zero();
  void add(const Gradients& other);
};

/// Parameter tensors bound to one tape. Tracked when gradients are supplied.
struct Bound {
  Tensor embeddings, w_e, theta, b, c, phi, w1, b1, w2, b2, score;
};

Bound bind(ad::Tape& tape, const Parameters& params, Gradients* grads);

Parameters init_params(const ModelConfig& cfg, std::size_t vocab_size, std::uint64_t seed,
                       double noise_scale = 1.0);

struct DocumentOutput {
  Tensor logits;
  Tensor mean_pre_norm;
  Tensor mean_l1;  // mean over windows of sum |coefficients entering M|
  std::vector<Tensor> window_logits;
  std::vector<Tensor> window_features;
  std::vector<double> pre_norms;
};

/// Per-window pipeline: token angles -> mixer -> optional measurement mask ->
/// head, then aggregation over windows. Dropout is applied only when `dropout`
/// points to an RNG.
DocumentOutput forward_document(const data::Document& doc, const Bound& params,
                                const ModelConfig& cfg, Rng* dropout = nullptr);

/// Mean or softmax-attention pooling of window logits. `features` supplies the
/// per-window readout the attention score is computed from.
Tensor aggregate(std::span<const Tensor> window_logits, Aggregation mode,
                 std::span<const Tensor> features = {}, const Tensor& score = {});

struct LossTerms {
  Tensor total;
  double ce = 0, psr = 0, l1c = 0, smooth = 0, l2 = 0;
};

/// CE + lambda_ps (mean pre_norm - tau)^2 + lambda_l1 (||b~||_1 - 1)^2
///    + lambda_smooth sum |c_{k+1} - c_k|^2 + lambda_l2 sum |c_k|^2.
/// L1C is identically zero while coefficients are l1-normalized in the forward pass.
LossTerms loss(const DocumentOutput& out, std::size_t label, const LossConfig& cfg,
               const Bound& params, const ModelConfig& model);

struct AttentionCount {
  std::size_t window = 0;
  std::size_t poly_coeffs = 0;
  std::size_t ff_angles = 0;
  std::size_t complex_as_one = 0;  // n + (d+1) + |phi|
  std::size_t complex_as_two = 0;  // 2n + 2(d+1) + |phi|
  std::size_t control_qubits = 0;  // ceil(log2 n), hardware-only
};

AttentionCount count_attention_params(const ModelConfig& cfg);

/// Splits a 64-bit seed stream; used to derive independent per-example seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace claqs::model
