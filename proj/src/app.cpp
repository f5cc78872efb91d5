#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "checkpoint.hpp"
#include "data.hpp"
#include "errors.hpp"
#include "mixer.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "quantum.hpp"
#include "rng.hpp"
#include "train.hpp"

namespace claqs::app {

using nlohmann::json;
using ad::cplx;

namespace {

namespace fs = std::filesystem;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failure on " + path.string());
}

std::size_t ceil_log2(std::size_t n) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return bits;
}

std::vector<cplx> random_complex(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<cplx> v(n);
  for (auto& x : v) {
    const double re = rng.uniform(-scale, scale);
    x = {re, rng.uniform(-scale, scale)};
  }
  return v;
}

std::vector<double> random_angles(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return v;
}

std::vector<cplx> as_complex(const std::vector<double>& v) { return {v.begin(), v.end()}; }

}  // namespace

// ---- train / eval ---------------------------------------------------------

json run_train(const RunConfig& cfg) {
  require_training_data(cfg, true);
  const json echo = to_json(cfg);
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  write_text(dir / "config.json", echo.dump(2) + "\n");

  const train::Dataset data = train::load_dataset(cfg);
  model::Parameters params =
      model::init_params(cfg.model, data.vocab.size(), cfg.seed, cfg.init.noise_scale);

  std::ofstream metrics(dir / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw Error(ErrorKind::Io, "cannot write " + (dir / "metrics.jsonl").string());
  metrics << json{{"kind", "config"}, {"config", echo}}.dump() << "\n";

  checkpoint::Checkpoint ckpt;
  ckpt.config_json = echo.dump();
  ckpt.vocab = data.vocab.tokens();
  const fs::path ckpt_path = dir / "checkpoint.bin";

  auto on_epoch = [&](const train::EpochRecord& rec, const model::Parameters& p, bool improved,
                      std::size_t step, const std::string& rng_state) {
    metrics << train::to_json(rec).dump() << "\n" << std::flush;
    if (!improved) return;
    ckpt.params = p;
    ckpt.step = step;
    ckpt.epoch = rec.epoch;
    ckpt.rng_state = rng_state;
    checkpoint::save(ckpt_path, ckpt);
  };
  auto result = [&] {
    try {
      return train::train(cfg, data, std::move(params), on_epoch);
    } catch (const Error& e) {
      // Keep the failure in the metrics stream before handing it up.
      metrics << json{{"kind", "error"}, {"error", to_string(e.kind())}, {"message", e.what()}}.dump()
              << "\n";
      throw;
    }
  }();
  if (result.history.empty()) {
    // Zero epochs: persist the initialization.
    ckpt.params = result.best_params;
    ckpt.rng_state = result.rng_state;
    checkpoint::save(ckpt_path, ckpt);
  }

  json report{{"command", "train"},
              {"config", echo},
              {"output_dir", dir.string()},
              {"vocab_size", data.vocab.size()},
              {"trainable_parameters", result.best_params.real_count()},
              {"epochs", result.history.size()},
              {"steps", result.steps},
              {"best_epoch", result.best_epoch},
              {"initial_val", train::to_json(result.initial)},
              {"checkpoint", ckpt_path.string()}};
  if (!data.test.empty()) {
    const auto test = train::evaluate(result.best_params, data.test, cfg);
    json rec = train::to_json(test);
    rec["kind"] = "test";
    rec["best_epoch"] = result.best_epoch;
    metrics << rec.dump() << "\n";
    report["test"] = train::to_json(test);
  }
  if (!result.history.empty()) report["final_val"] = train::to_json(result.history.back().val);
  return report;
}

json run_eval(const RunConfig& cfg, const fs::path& checkpoint_path) {
  const auto ckpt = checkpoint::load(checkpoint_path);
  RunConfig model_cfg;
  try {
    model_cfg = parse_config(json::parse(ckpt.config_json));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, "checkpoint config: " + std::string(e.what()));
  }
  RunConfig run = cfg;
  run.model = model_cfg.model;
  run.loss = model_cfg.loss;

  std::vector<data::Record> records;
  if (cfg.data.synthetic) {
    const auto& s = *cfg.data.synthetic;
    records = data::synth_majority(s.seed, s.size, s.length, s.vocab_size).test;
  } else if (!cfg.data.test.empty()) {
    records = data::load_tsv(cfg.data.test, run.model.classes);
  } else {
    throw Error(ErrorKind::Config, "data.test: required for eval (or data.synthetic)");
  }
  if (records.empty()) throw Error(ErrorKind::Input, "test split is empty");
  const auto vocab = data::Vocab::from_tokens(ckpt.vocab);
  const auto docs =
      data::encode(records, vocab, run.model.window, run.model.effective_stride());
  const auto m = train::evaluate(ckpt.params, docs, run);
  return {{"command", "eval"},
          {"config", to_json(run)},
          {"checkpoint", checkpoint_path.string()},
          {"checkpoint_epoch", ckpt.epoch},
          {"test", train::to_json(m)}};
}

// ---- gradcheck ------------------------------------------------------------

namespace {

double document_loss(const model::Parameters& params, const data::Document& doc,
                     const RunConfig& cfg) {
  ad::Tape tape;
  const auto bound = model::bind(tape, params, nullptr);
  const auto out = model::forward_document(doc, bound, cfg.model);
  return model::loss(out, doc.label, cfg.loss, bound, cfg.model).total.item().real();
}

struct GroupError {
  double max_rel = 0.0;
  double max_abs = 0.0;
  std::size_t coordinates = 0;
  std::string worst;
};

}  // namespace

json run_gradcheck(const RunConfig& cfg, const std::string& corrupt_group) {
  const auto& m = cfg.model;
  if (m.qubits > kGradcheckMaxQubits || m.window > kGradcheckMaxWindow) {
    throw Error(ErrorKind::Budget, "gradcheck is limited to q <= " +
                                       std::to_string(kGradcheckMaxQubits) + " and n <= " +
                                       std::to_string(kGradcheckMaxWindow) + " (got q=" +
                                       std::to_string(m.qubits) + ", n=" +
                                       std::to_string(m.window) + ")");
  }
  const auto& g = cfg.gradcheck;
  if (g.vocab_size < 3) throw Error(ErrorKind::Config, "gradcheck.vocab_size: must be >= 3");

  Rng rng(model::mix_seed(cfg.seed, 0x67726164ULL));
  model::Parameters params = model::init_params(m, g.vocab_size, cfg.seed, cfg.init.noise_scale);
  for (auto& p : params.list) {
    for (auto& v : p.value) {
      const double re = v.real() + rng.uniform(-g.jitter, g.jitter);
      const double im = p.real_valued ? 0.0 : v.imag() + rng.uniform(-g.jitter, g.jitter);
      v = {re, im};
    }
  }
  if (!corrupt_group.empty()) {
    const auto groups = params.groups();
    if (std::find(groups.begin(), groups.end(), corrupt_group) == groups.end()) {
      throw Error(ErrorKind::Config, "unknown parameter group '" + corrupt_group + "'");
    }
  }

  data::Document doc;
  const std::size_t length = g.doc_length ? g.doc_length : m.window + (m.window + 1) / 2;
  for (std::size_t i = 0; i < length; ++i) doc.ids.push_back(2 + rng.below(g.vocab_size - 2));
  doc.label = rng.below(m.classes);
  doc.windows = data::make_windows(doc.ids, m.window, m.effective_stride());

  model::Gradients grads(params);
  double loss_value = 0.0;
  {
    ad::Tape tape;
    const auto bound = model::bind(tape, params, &grads);
    const auto out = model::forward_document(doc, bound, m);
    const auto terms = model::loss(out, doc.label, cfg.loss, bound, m);
    loss_value = terms.total.item().real();
    tape.backward(terms.total);
  }

  std::vector<std::string> order;
  std::vector<GroupError> errors;
  auto group_slot = [&](const std::string& name) -> GroupError& {
    const auto it = std::find(order.begin(), order.end(), name);
    if (it != order.end()) return errors[static_cast<std::size_t>(it - order.begin())];
    order.push_back(name);
    errors.emplace_back();
    return errors.back();
  };

  const double h = kGradcheckStep;
  for (std::size_t pi = 0; pi < params.list.size(); ++pi) {
    const std::string name = params.list[pi].name;
    const std::string group = params.list[pi].group;
    GroupError& ge = group_slot(group);
    const double factor = group == corrupt_group ? 1.01 : 1.0;
    const std::size_t parts = params.list[pi].real_valued ? 1 : 2;
    for (std::size_t k = 0; k < params.list[pi].value.size(); ++k) {
      for (std::size_t r = 0; r < parts; ++r) {
        const cplx saved = params.list[pi].value[k];
        const cplx step = r == 0 ? cplx(h, 0.0) : cplx(0.0, h);
        params.list[pi].value[k] = saved + step;
        const double up = document_loss(params, doc, cfg);
        params.list[pi].value[k] = saved - step;
        const double down = document_loss(params, doc, cfg);
        params.list[pi].value[k] = saved;

        const double numeric = (up - down) / (2.0 * h);
        const cplx ga = grads.per_param[pi][k] * factor;
        const double analytic = r == 0 ? ga.real() : ga.imag();
        const double diff = std::abs(analytic - numeric);
        const double scale = std::max({std::abs(analytic), std::abs(numeric),
                                       kGradcheckAbsFloor / kGradcheckTolerance});
        const double rel = diff / scale;
        ++ge.coordinates;
        ge.max_abs = std::max(ge.max_abs, diff);
        if (rel >= ge.max_rel) {
          ge.max_rel = rel;
          ge.worst = name + "[" + std::to_string(k) + "]" + (r == 0 ? ".re" : ".im");
        }
      }
    }
  }

  bool pass = true;
  json groups = json::array();
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const bool ok = errors[i].max_rel <= kGradcheckTolerance;
    pass = pass && ok;
    if (!ok) failed.push_back(order[i]);
    groups.push_back({{"group", order[i]},
                      {"coordinates", errors[i].coordinates},
                      {"max_rel_error", errors[i].max_rel},
                      {"max_abs_error", errors[i].max_abs},
                      {"worst", errors[i].worst},
                      {"pass", ok}});
  }
  json report{{"command", "gradcheck"},
              {"config", to_json(cfg)},
              {"step", h},
              {"tolerance", kGradcheckTolerance},
              {"abs_floor", kGradcheckAbsFloor},
              {"loss", loss_value},
              {"document_length", length},
              {"windows", doc.windows.size()},
              {"groups", groups},
              {"failed_groups", failed},
              {"pass", pass}};
  if (!corrupt_group.empty()) report["corrupted_group"] = corrupt_group;
  return report;
}

// ---- verify ---------------------------------------------------------------

json run_verify(const RunConfig& cfg) {
  const auto& m = cfg.model;
  if (m.qubits > kVerifyMaxQubits) {
    throw Error(ErrorKind::Budget, "verify builds dense 2^q matrices and is limited to q <= " +
                                       std::to_string(kVerifyMaxQubits) + " (got q=" +
                                       std::to_string(m.qubits) + ")");
  }
  if (m.qubits < 2) throw Error(ErrorKind::Config, "model.qubits: must be >= 2");
  const std::size_t q = m.qubits, n = m.window, d = m.degree, dim = std::size_t{1} << q;
  const std::size_t angles = m.angle_count(), ff_angles = m.ff_angle_count();

  double unitarity = 0, ansatz_match = 0, lcu = 0, poly = 0, readout = 0, pre_norm = 0;
  std::size_t failures = 0;
  for (std::size_t seed = 0; seed < cfg.verify.seeds; ++seed) {
    Rng rng(model::mix_seed(cfg.seed, seed));
    std::vector<std::vector<double>> token(n);
    for (auto& t : token) t = random_angles(rng, angles);
    const auto b = random_complex(rng, n);
    const auto c = random_complex(rng, d + 1);
    const auto phi = random_angles(rng, ff_angles);
    const auto input = random_complex(rng, dim);
    // Mask a random subset, keeping at least one position.
    std::vector<std::uint8_t> mask(n, 1);
    if (seed % 2 == 1) {
      for (auto& x : mask) x = rng.uniform() < 0.6 ? 1 : 0;
      mask[rng.below(n)] = 1;
    }

    std::vector<oracle::Matrix> units;
    double seed_err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto kernel_u = qsim::kernel::ansatz_unitary(q, m.layers, token[j]);
      auto u = oracle::ansatz(q, m.layers, token[j]);
      const double ue = oracle::unitarity_error(oracle::Matrix::from(dim, dim, kernel_u));
      const double me = oracle::max_abs_diff(kernel_u, u.data());
      unitarity = std::max(unitarity, ue);
      ansatz_match = std::max(ansatz_match, me);
      seed_err = std::max({seed_err, ue, me});
      units.push_back(std::move(u));
    }

    ad::Tape tape;
    std::vector<ad::Tensor> token_t;
    for (const auto& t : token) token_t.push_back(tape.constant({angles}, as_complex(t)));
    const auto b_t = tape.constant({n}, b);
    const auto c_t = tape.constant({d + 1}, c);
    const auto phi_t = tape.constant({ff_angles}, as_complex(phi));
    const auto coeffs = m.normalize_lcu ? mix::l1_normalize(b_t, mask)
                                        : mix::mask_coefficients(b_t, mask);

    std::vector<cplx> ref_coeffs(n);
    double l1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) l1 += mask[j] ? std::abs(b[j]) : 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      ref_coeffs[j] = mask[j] ? (m.normalize_lcu ? b[j] / l1 : b[j]) : cplx{};
    }
    const oracle::Matrix big_m = oracle::linear_combination(ref_coeffs, units);

    const qsim::Statevector in_state = qsim::from_amplitudes(tape, q, input);
    const auto lcu_out = mix::apply_M(in_state, coeffs, token_t, m.layers, mask);
    const double le = oracle::max_abs_diff(lcu_out.amps.values(), big_m * std::span<const cplx>(input));
    lcu = std::max(lcu, le);

    const auto poly_out = mix::apply_polynomial(q, coeffs, token_t, m.layers, c_t, mask);
    const auto ref_poly = oracle::polynomial_state(c, big_m);
    const double pe = oracle::max_abs_diff(poly_out.amps.values(), ref_poly);
    poly = std::max(poly, pe);

    double ref_norm = 0.0;
    for (auto v : ref_poly) ref_norm += std::norm(v);
    double re = 0.0, ne = 0.0;
    if (ref_norm >= 1e-12) {
      const mix::MixerShape shape{q, m.layers, m.ff_layers, m.normalize_lcu};
      const auto mixed = mix::mix_window(token_t, {b_t, c_t, phi_t}, shape, mask);
      auto psi = oracle::ansatz(q, m.ff_layers, phi) * std::span<const cplx>(ref_poly);
      const auto ref_features = oracle::pauli_readout(q, psi);
      const auto feats = mixed.features.values();
      for (std::size_t i = 0; i < ref_features.size(); ++i) {
        re = std::max(re, std::abs(feats[i] - ref_features[i]));
      }
      ne = std::abs(mixed.pre_norm.item().real() - ref_norm);
    }
    readout = std::max(readout, re);
    pre_norm = std::max(pre_norm, ne);
    seed_err = std::max({seed_err, le, pe, re, ne});
    if (seed_err > kVerifyTolerance) ++failures;
  }

  const bool pass = failures == 0;
  return {{"command", "verify"},
          {"config", to_json(cfg)},
          {"seeds", cfg.verify.seeds},
          {"tolerance", kVerifyTolerance},
          {"max_errors",
           {{"unitarity", unitarity},
            {"ansatz_vs_dense", ansatz_match},
            {"lcu", lcu},
            {"polynomial", poly},
            {"readout", readout},
            {"pre_norm", pre_norm}}},
          {"failures", failures},
          {"pass", pass}};
}

// ---- params ---------------------------------------------------------------

json run_params(const RunConfig& cfg) {
  const auto count = model::count_attention_params(cfg.model);
  json report{{"command", "params"}, {"config", to_json(cfg)}};
  report["attention"] = {{"lcu_coefficients", count.window},
                         {"poly_coefficients", count.poly_coeffs},
                         {"ff_angles", count.ff_angles},
                         {"complex_as_one", count.complex_as_one},
                         {"complex_as_two", count.complex_as_two}};

  // Reference totals (q=8, l_ff=6, degree 5) by window length.
  struct Row {
    std::size_t window, printed;
  };
  const Row rows[] = {{128, 326}, {256, 454}};
  json table = json::array();
  std::size_t as_one[2] = {}, idx = 0;
  for (const auto& row : rows) {
    ModelConfig ref = cfg.model;
    ref.qubits = 8;
    ref.ff_layers = 6;
    ref.degree = 5;
    ref.window = row.window;
    const auto rc = model::count_attention_params(ref);
    as_one[idx++] = rc.complex_as_one;
    table.push_back({{"window", row.window},
                     {"degree", 5},
                     {"printed", row.printed},
                     {"complex_as_one", rc.complex_as_one},
                     {"complex_as_two", rc.complex_as_two},
                     {"complex_as_one_matches", rc.complex_as_one == row.printed},
                     {"complex_as_two_matches", rc.complex_as_two == row.printed}});
  }
  report["reference_totals"] = {
      {"rows", table},
      {"delta_128_to_256", as_one[1] - as_one[0]},
      {"delta_exact", as_one[1] - as_one[0] == 128},
      {"discrepancy",
       "counting each complex LCU coefficient as two reals gives 2n, but the reference totals equal "
       "n + (d+1) + |phi|; the 2n accounting overshoots by n + (d+1)"}};
  const bool reference_shape = cfg.model.qubits == 8 && cfg.model.ff_layers == 6 &&
                               cfg.model.degree == 5;
  for (const auto& row : rows) {
    if (reference_shape && cfg.model.window == row.window) {
      report["attention"]["reference_total"] = row.printed;
      report["attention"]["matches_reference"] = count.complex_as_one == row.printed;
    }
  }

  report["qubits"] = {{"data", cfg.model.qubits},
                      {"control_hardware_only", ceil_log2(cfg.model.window)},
                      {"total_on_hardware", cfg.model.qubits + ceil_log2(cfg.model.window)}};

  const bool have_data = cfg.data.synthetic || !cfg.data.train.empty();
  std::size_t vocab = 0;
  if (have_data) vocab = train::load_dataset(cfg).vocab.size();
  const auto params = model::init_params(cfg.model, std::max<std::size_t>(vocab, 2), cfg.seed);
  json groups = json::object();
  std::size_t without_embeddings = 0;
  for (const auto& p : params.list) {
    if (p.group == "embeddings") continue;
    groups[p.group] = groups.value(p.group, std::size_t{0}) + p.real_count();
    without_embeddings += p.real_count();
  }
  report["trainable"] = {{"groups_real_count", groups},
                         {"excluding_embeddings", without_embeddings},
                         {"embedding_per_token", cfg.model.embed_dim}};
  if (have_data) {
    report["trainable"]["vocab_size"] = vocab;
    report["trainable"]["total"] = without_embeddings + vocab * cfg.model.embed_dim;
  }
  return report;
}

// ---- synth ----------------------------------------------------------------

json run_synth(const RunConfig& cfg) {
  SyntheticConfig s;
  s.seed = cfg.seed;
  if (cfg.data.synthetic) s = *cfg.data.synthetic;
  const auto splits = data::synth_majority(s.seed, s.size, s.length, s.vocab_size);
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  data::write_tsv(dir / "train.tsv", splits.train);
  data::write_tsv(dir / "val.tsv", splits.val);
  data::write_tsv(dir / "test.tsv", splits.test);
  json c = to_json(cfg);
  c["data"]["synthetic"] = {{"size", s.size},
                            {"length", s.length},
                            {"vocab_size", s.vocab_size},
                            {"seed", s.seed}};
  return {{"command", "synth"},
          {"config", c},
          {"output_dir", dir.string()},
          {"files",
           {{"train", (dir / "train.tsv").string()},
            {"val", (dir / "val.tsv").string()},
            {"test", (dir / "test.tsv").string()}}},
          {"counts",
           {{"train", splits.train.size()}, {"val", splits.val.size()}, {"test", splits.test.size()}}}};
}

}  // namespace claqs::app
