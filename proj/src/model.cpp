#include "model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>

#include "errors.hpp"

namespace claqs::model {

Param& Parameters::at(const std::string& name) { return list[index(name)]; }
const Param& Parameters::at(const std::string& name) const { return list[index(name)]; }

std::size_t Parameters::index(const std::string& name) const {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i].name == name) return i;
  }
  throw Error(ErrorKind::Index, "no parameter named " + name);
}

std::vector<std::string> Parameters::groups() const {
  std::vector<std::string> out;
  for (const auto& p : list) {
    if (std::find(out.begin(), out.end(), p.group) == out.end()) out.push_back(p.group);
  }
  return out;
}

std::size_t Parameters::real_count() const {
  std::size_t n = 0;
  for (const auto& p : list) n += p.real_count();
  return n;
}

Gradients::Gradients(const Parameters& params) {
  per_param.reserve(params.list.size());
  for (const auto& p : params.list) per_param.emplace_back(p.value.size());
}

void Gradients::zero() {
  for (auto& g : per_param) std::fill(g.begin(), g.end(), cplx{});
}

void Gradients::add(const Gradients& other) {
  for (std::size_t i = 0; i < per_param.size(); ++i) {
    for (std::size_t k = 0; k < per_param[i].size(); ++k) per_param[i][k] += other.per_param[i][k];
  }
}

Bound bind(ad::Tape& tape, const Parameters& params, Gradients* grads) {
  auto get = [&](const std::string& name) -> Tensor {
    const std::size_t i = params.index(name);
    const Param& p = params.list[i];
    if (grads) return tape.leaf(p.shape, p.value, grads->per_param[i]);
    return tape.view(p.shape, p.value);
  };
  Bound b;
  b.embeddings = get("embeddings");
  b.w_e = get("W_E");
  b.theta = get("theta");
  b.b = get("b");
  b.c = get("c");
  b.phi = get("phi");
  b.w1 = get("head.w1");
  b.b1 = get("head.b1");
  b.w2 = get("head.w2");
  b.b2 = get("head.b2");
  const bool has_score = std::any_of(params.list.begin(), params.list.end(),
                                     [](const Param& p) { return p.name == "attention.score"; });
  if (has_score) b.score = get("attention.score");
  return b;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Param make(std::string name, std::string group, ad::Shape shape, bool real_valued = true,
           bool decay = true) {
  Param p;
  p.name = std::move(name);
  p.group = std::move(group);
  p.value.assign(ad::numel(shape), cplx{});
  p.shape = std::move(shape);
  p.real_valued = real_valued;
  p.decay = decay;
  return p;
}

// Xavier-uniform for a [fan_out x fan_in] matrix.
void xavier(Param& p, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : p.value) v = rng.uniform(-bound, bound);
}

void uniform(Param& p, double bound, Rng& rng) {
  for (auto& v : p.value) v = rng.uniform(-bound, bound);
}

cplx complex_noise(double max_magnitude, Rng& rng) {
  const double r = rng.uniform(0.0, max_magnitude);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return std::polar(r, angle);
}

}  // namespace

Parameters init_params(const ModelConfig& cfg, std::size_t vocab_size, std::uint64_t seed,
                       double noise_scale) {
  if (vocab_size < 2) throw Error(ErrorKind::Input, "vocabulary must contain PAD and UNK");
  Rng rng(seed);
  const std::size_t q = cfg.qubits, n = cfg.window, de = cfg.embed_dim;
  const std::size_t angles = cfg.angle_count(), feats = 3 * q;
  Parameters params;

  Param emb = make("embeddings", "embeddings", {vocab_size, de});
  xavier(emb, de, vocab_size, rng);
  Param we = make("W_E", "W_E", {angles, de});
  xavier(we, de, angles, rng);
  Param theta = make("theta", "theta", {angles});
  uniform(theta, 0.01 * noise_scale, rng);

  Param b = make("b", "b", {n}, false, false);
  for (auto& v : b.value) v = 1.0 / static_cast<double>(n) + complex_noise(0.01 * noise_scale / n, rng);
  Param c = make("c", "c", {cfg.degree + 1}, false);
  for (std::size_t k = 0; k < c.value.size(); ++k) {
    c.value[k] = (k == 1 ? 1.0 : 0.0) + complex_noise(0.01 * noise_scale, rng);
  }
  Param phi = make("phi", "phi", {cfg.ff_angle_count()});
  uniform(phi, 0.01 * noise_scale, rng);

  Param w1 = make("head.w1", "head", {cfg.hidden, feats});
  xavier(w1, feats, cfg.hidden, rng);
  Param b1 = make("head.b1", "head", {cfg.hidden});
  Param w2 = make("head.w2", "head", {cfg.classes, cfg.hidden});
  xavier(w2, cfg.hidden, cfg.classes, rng);
  Param b2 = make("head.b2", "head", {cfg.classes});

  for (auto* p : {&emb, &we, &theta, &b, &c, &phi, &w1, &b1, &w2, &b2}) {
    params.list.push_back(std::move(*p));
  }
  if (cfg.aggregation == Aggregation::AttentionPool) {
    params.list.push_back(make("attention.score", "attention", {feats}));
  }
  return params;
}

Tensor aggregate(std::span<const Tensor> window_logits, Aggregation mode,
                 std::span<const Tensor> features, const Tensor& score) {
  if (window_logits.empty()) throw Error(ErrorKind::Input, "no windows to aggregate");
  ad::Tape& tape = window_logits[0].tape();
  const std::size_t w = window_logits.size();
  if (mode == Aggregation::MeanLogits) {
    const Tensor weights = tape.constant({w}, std::vector<cplx>(w, 1.0 / static_cast<double>(w)));
    return ad::weighted_sum(weights, window_logits);
  }
  if (!score.valid() || features.size() != w) {
    throw Error(ErrorKind::Input, "attention pooling needs a score vector and one feature vector per window");
  }
  std::vector<Tensor> scores;
  scores.reserve(w);
  for (const auto& f : features) scores.push_back(ad::sum(ad::hadamard(score, f)));
  return ad::weighted_sum(ad::softmax(ad::stack(scores)), window_logits);
}

DocumentOutput forward_document(const data::Document& doc, const Bound& params,
                                const ModelConfig& cfg, Rng* dropout) {
  if (doc.windows.empty()) throw Error(ErrorKind::Input, "empty document: no windows after segmentation");
  ad::Tape& tape = params.b.tape();
  const std::size_t de = cfg.embed_dim;
  const std::size_t vocab = params.embeddings.shape()[0];
  const mix::MixerShape shape{cfg.qubits, cfg.layers, cfg.ff_layers, cfg.normalize_lcu};
  const mix::MixerParams mixer{params.b, params.c, params.phi};

  std::map<std::size_t, Tensor> angle_cache;
  auto token_angles = [&](std::size_t id) -> Tensor {
    auto it = angle_cache.find(id);
    if (it != angle_cache.end()) return it->second;
    if (id >= vocab) throw Error(ErrorKind::Index, "token id " + std::to_string(id) + " outside vocabulary");
    std::vector<std::size_t> row(de);
    for (std::size_t k = 0; k < de; ++k) row[k] = id * de + k;
    const Tensor e = ad::gather(params.embeddings, row);
    const Tensor angles = ad::add(ad::matvec(params.w_e, e), params.theta);
    angle_cache.emplace(id, angles);
    return angles;
  };

  std::vector<cplx> feature_mask;
  if (!cfg.measurement_mask.empty()) {
    for (auto m : cfg.measurement_mask) feature_mask.push_back(m ? 1.0 : 0.0);
  }

  DocumentOutput out;
  std::vector<Tensor> pre_norms, l1s;
  for (std::size_t w = 0; w < doc.windows.size(); ++w) {
    const auto& window = doc.windows[w];
    if (window.ids.size() != cfg.window || window.mask.size() != cfg.window) {
      throw Error(ErrorKind::Shape, "window length differs from model window");
    }
    std::vector<Tensor> angles(cfg.window);
    for (std::size_t j = 0; j < cfg.window; ++j) {
      if (window.mask[j]) angles[j] = token_angles(window.ids[j]);
    }
    const mix::MixerOutput mixed = mix::mix_window(angles, mixer, shape, window.mask, w);
    Tensor features = mixed.features;
    if (!feature_mask.empty()) features = ad::mul_const(features, feature_mask);

    Tensor hidden = ad::tanh(ad::add(ad::matvec(params.w1, features), params.b1));
    if (dropout && cfg.dropout > 0.0) {
      std::vector<cplx> keep(cfg.hidden);
      for (auto& k : keep) k = dropout->uniform() < cfg.dropout ? 0.0 : 1.0 / (1.0 - cfg.dropout);
      hidden = ad::mul_const(hidden, keep);
    }
    out.window_logits.push_back(ad::add(ad::matvec(params.w2, hidden), params.b2));
    out.window_features.push_back(features);
    pre_norms.push_back(mixed.pre_norm);
    out.pre_norms.push_back(mixed.pre_norm.item().real());
    l1s.push_back(ad::sum(ad::abs(mixed.coeffs)));
  }

  out.logits = aggregate(out.window_logits, cfg.aggregation, out.window_features, params.score);
  const std::size_t nw = pre_norms.size();
  const Tensor mean_w = tape.constant({nw}, std::vector<cplx>(nw, 1.0 / static_cast<double>(nw)));
  out.mean_pre_norm = ad::weighted_sum(mean_w, pre_norms);
  out.mean_l1 = ad::weighted_sum(mean_w, l1s);
  return out;
}

LossTerms loss(const DocumentOutput& out, std::size_t label, const LossConfig& cfg,
               const Bound& params, const ModelConfig& model) {
  ad::Tape& tape = out.logits.tape();
  if (label >= out.logits.size()) throw Error(ErrorKind::Label, "label " + std::to_string(label) + " >= class count");
  LossTerms terms;
  Tensor total = ad::softmax_cross_entropy(out.logits, label);
  terms.ce = total.item().real();

  if (cfg.lambda_ps > 0.0) {
    const Tensor gap = ad::sub(out.mean_pre_norm, tape.scalar(cfg.tau));
    const Tensor psr = ad::scale(ad::squared_norm(gap), cfg.lambda_ps);
    terms.psr = psr.item().real();
    total = ad::add(total, psr);
  }
  if (cfg.lambda_l1 > 0.0 && !model.normalize_lcu) {
    const Tensor gap = ad::sub(out.mean_l1, tape.scalar(1.0));
    const Tensor l1c = ad::scale(ad::squared_norm(gap), cfg.lambda_l1);
    terms.l1c = l1c.item().real();
    total = ad::add(total, l1c);
  }
  const std::size_t nc = params.c.size();
  if (cfg.lambda_qsvt_smooth > 0.0) {
    std::vector<std::size_t> hi, lo;
    for (std::size_t k = 0; k + 1 < nc; ++k) {
      lo.push_back(k);
      hi.push_back(k + 1);
    }
    const Tensor diff = ad::sub(ad::gather(params.c, hi), ad::gather(params.c, lo));
    const Tensor smooth = ad::scale(ad::squared_norm(diff), cfg.lambda_qsvt_smooth);
    terms.smooth = smooth.item().real();
    total = ad::add(total, smooth);
  }
  if (cfg.lambda_qsvt_l2 > 0.0) {
    const Tensor l2 = ad::scale(ad::squared_norm(params.c), cfg.lambda_qsvt_l2);
    terms.l2 = l2.item().real();
    total = ad::add(total, l2);
  }
  terms.total = ad::real(total);
  return terms;
}

AttentionCount count_attention_params(const ModelConfig& cfg) {
  AttentionCount c;
  c.window = cfg.window;
  c.poly_coeffs = cfg.degree + 1;
  c.ff_angles = cfg.ff_angle_count();
  c.complex_as_one = c.window + c.poly_coeffs + c.ff_angles;
  c.complex_as_two = 2 * c.window + 2 * c.poly_coeffs + c.ff_angles;
  c.control_qubits = cfg.window <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(cfg.window - 1));
  return c;
}

}  // namespace claqs::model
