// Acceptance suite. Prints one line per criterion:
//   criterion N: PASS|FAIL|SKIP  <detail>
// `acceptance --criterion N` runs one criterion and exits 0 on PASS, 1 on FAIL
// and 77 on SKIP. Without arguments every criterion runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "app.hpp"
#include "config.hpp"
#include "data.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "mixer.hpp"
#include "model.hpp"
#include "quantum.hpp"
#include "rng.hpp"

using namespace claqs;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Result {
  Outcome outcome;
  std::string detail;
};

Result verdict(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

json load_json(const std::string& name) {
  std::ifstream in(fs::path(CLAQS_SOURCE_DIR) / "configs" / name);
  return json::parse(in);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "claqs_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<dense::cplx> random_complex(Rng& rng, std::size_t n) {
  std::vector<dense::cplx> v(n);
  for (auto& x : v) {
    const double re = rng.uniform(-1.0, 1.0);
    x = {re, rng.uniform(-1.0, 1.0)};
  }
  return v;
}

std::vector<double> random_angles(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return v;
}

// ---------------------------------------------------------------------------

Result unitarity() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const std::size_t qs[] = {2, 4, 8}, ls[] = {1, 2, 3};
  double worst = 0;
  for (std::size_t inst = 0; inst < 100; ++inst) {
    const std::size_t q = qs[inst % 3], l = ls[(inst / 3) % 3];
    const std::size_t dim = std::size_t{1} << q;
    const auto angles = random_angles(rng, 4 * l * q);
    const auto u = qsim::kernel::ansatz_unitary(q, l, angles);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        dense::cplx s = 0;
        for (std::size_t k = 0; k < dim; ++k) s += std::conj(u[k * dim + i]) * u[k * dim + j];
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
  }
  const double secs = seconds_since(t0);
  return verdict(worst <= 1e-10 && secs < 30.0,
                 fmt("max|U^H U - I| = %.3e over 100 instances, %.1f s", worst, secs));
}

// Dense reference for P_c(M)|0>, built from tests/dense.hpp gate matrices.
struct DenseMixer {
  std::vector<dense::cplx> poly_state;  // P_c(M)|0>
  std::vector<double> features;
  double pre_norm = 0;
};

DenseMixer dense_mixer(std::size_t q, std::size_t layers, std::size_t ff_layers,
                       const std::vector<std::vector<double>>& token_angles,
                       const std::vector<dense::cplx>& b, const std::vector<std::uint8_t>& mask,
                       const std::vector<dense::cplx>& c, const std::vector<double>& phi) {
  const std::size_t dim = std::size_t{1} << q;
  double l1 = 0;
  for (std::size_t j = 0; j < b.size(); ++j)
    if (mask[j]) l1 += std::abs(b[j]);
  dense::Mat m(dim);
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!mask[j]) continue;
    const auto u = dense::ansatz(q, layers, token_angles[j]);
    for (std::size_t k = 0; k < dim * dim; ++k) m.a[k] += (b[j] / l1) * u.a[k];
  }
  dense::Mat poly(dim), power = dense::identity(dim);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k > 0) power = dense::mul(power, m);
    for (std::size_t e = 0; e < dim * dim; ++e) poly.a[e] += c[k] * power.a[e];
  }
  DenseMixer out;
  out.poly_state.resize(dim);
  for (std::size_t r = 0; r < dim; ++r) out.poly_state[r] = poly.at(r, 0);
  for (auto a : out.poly_state) out.pre_norm += std::norm(a);
  if (out.pre_norm <= 1e-12) return out;
  const auto psi = dense::apply(dense::ansatz(q, ff_layers, phi), out.poly_state);
  const dense::Gate2 paulis[] = {dense::px(), dense::py(), dense::pz()};
  for (const auto& p : paulis)
    for (std::size_t k = 0; k < q; ++k) out.features.push_back(dense::expectation(psi, dense::single(q, k, p)));
  return out;
}

Result oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(202);
  double worst_state = 0, worst_features = 0, worst_norm = 0;
  for (std::size_t seed = 0; seed < 50; ++seed) {
    const std::size_t q = 2 + seed % 2, n = 1 + seed % 4, d = 1 + (seed / 4) % 4;
    const std::size_t layers = 1 + seed % 2, ff_layers = 1 + (seed / 2) % 2;
    std::vector<std::vector<double>> angles(n);
    for (auto& a : angles) a = random_angles(rng, 4 * layers * q);
    const auto b = random_complex(rng, n);
    const auto c = random_complex(rng, d + 1);
    const auto phi = random_angles(rng, 4 * ff_layers * q);
    std::vector<std::uint8_t> mask(n, 1);
    if (seed % 3 == 2 && n > 1) mask[rng.below(n)] = 0;

    const auto ref = dense_mixer(q, layers, ff_layers, angles, b, mask, c, phi);

    ad::Tape tape;
    std::vector<ad::Tensor> angle_t(n);
    for (std::size_t j = 0; j < n; ++j)
      angle_t[j] = tape.constant({angles[j].size()}, {angles[j].begin(), angles[j].end()});
    const auto bt = tape.constant({n}, b);
    const auto ct = tape.constant({d + 1}, c);
    const auto phit = tape.constant({phi.size()}, {phi.begin(), phi.end()});
    const auto coeffs = mix::l1_normalize(bt, mask);
    const auto state = mix::apply_polynomial(q, coeffs, angle_t, layers, ct, mask);
    const auto amps = state.amps.values();
    for (std::size_t i = 0; i < amps.size(); ++i) worst_state = std::max(worst_state, std::abs(amps[i] - ref.poly_state[i]));

    const auto mixed = mix::mix_window(angle_t, {bt, ct, phit}, {q, layers, ff_layers, true}, mask);
    worst_norm = std::max(worst_norm, std::abs(mixed.pre_norm.item().real() - ref.pre_norm));
    const auto f = mixed.features.values();
    for (std::size_t i = 0; i < ref.features.size(); ++i)
      worst_features = std::max(worst_features, std::abs(f[i].real() - ref.features[i]));
  }
  // The verify command runs its own dense sweep; it must agree too.
  const json rep = app::run_verify(parse_config(load_json("verify.json")));
  const double secs = seconds_since(t0);
  const double worst = std::max({worst_state, worst_features, worst_norm});
  const bool ok = worst <= 1e-10 && rep["pass"] == true && secs < 60.0;
  return verdict(ok, fmt("test-side dense oracle: state %.2e, pre_norm %.2e, readout %.2e; "
                        "verify command (%d seeds): %s; %.1f s",
                        worst_state, worst_norm, worst_features, rep["seeds"].get<int>(),
                        rep["pass"] == true ? "pass" : "fail", secs));
}

Result l1_invariant() {
  Rng rng(303);
  double worst = 0, masked_leak = 0;
  std::size_t masked_draws = 0;
  for (std::size_t draw = 0; draw < 1000; ++draw) {
    const std::size_t n = 1 + rng.below(32);
    std::vector<dense::cplx> b(n);
    for (auto& x : b) {
      const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
      const double re = rng.uniform(-scale, scale);
      x = {re, rng.uniform(-scale, scale)};
    }
    std::vector<std::uint8_t> mask;
    if (draw % 2 == 1) {
      mask.assign(n, 1);
      const std::size_t keep = 1 + rng.below(n);
      for (std::size_t j = keep; j < n; ++j) mask[j] = 0;  // trailing PAD, as in a last window
      if (draw % 4 == 3) {
        for (auto& m : mask) m = rng.uniform() < 0.5;
        mask[rng.below(n)] = 1;
      }
      ++masked_draws;
    }
    ad::Tape tape;
    const auto bt = mix::l1_normalize(tape.constant({n}, b), mask);
    double l1 = 0;
    const auto v = bt.values();
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask.empty() && !mask[j]) {
        masked_leak = std::max(masked_leak, std::abs(v[j]));
      } else {
        l1 += std::abs(v[j]);
      }
    }
    worst = std::max(worst, std::abs(l1 - 1.0));
  }
  return verdict(worst <= 1e-12 && masked_leak == 0.0,
                 fmt("max|sum|b~| - 1| = %.2e over 1000 draws (%zu masked), masked entries max %.1e",
                     worst, masked_draws, masked_leak));
}

Result gradient_check() {
  const auto t0 = Clock::now();
  const RunConfig cfg = parse_config(load_json("gradcheck.json"));
  const json rep = app::run_gradcheck(cfg);
  double worst = 0;
  std::string worst_group;
  std::vector<std::string> groups;
  for (const auto& g : rep["groups"]) {
    groups.push_back(g["group"]);
    if (g["max_rel_error"].get<double>() >= worst) {
      worst = g["max_rel_error"];
      worst_group = g["group"];
    }
  }
  // The harness must notice a 1% error in any single group.
  std::vector<std::string> missed;
  for (const auto& g : groups) {
    const json bad = app::run_gradcheck(cfg, g);
    if (bad["failed_groups"] != json::array({g})) missed.push_back(g);
  }
  const double secs = seconds_since(t0);
  std::string names;
  for (const auto& g : groups) names += (names.empty() ? "" : ",") + g;
  const bool ok = rep["pass"] == true && missed.empty() && secs < 120.0;
  return verdict(ok, fmt("groups {%s}: worst rel err %.2e (%s); fault injection caught %zu/%zu; %.1f s",
                         names.c_str(), worst, worst_group.c_str(), groups.size() - missed.size(),
                         groups.size(), secs));
}

// PSR-only gradient: difference of full-loss gradients with and without the term.
struct PsrInstance {
  ModelConfig model;
  model::Parameters params;
  data::Document doc;

  double mean_pre_norm() const {
    ad::Tape tape;
    return model::forward_document(doc, model::bind(tape, params, nullptr), model).mean_pre_norm.item().real();
  }

  model::Gradients gradient(double lambda, double tau) const {
    model::Gradients g(params);
    ad::Tape tape;
    const auto bound = model::bind(tape, params, &g);
    const auto out = model::forward_document(doc, bound, model);
    LossConfig cfg;
    cfg.lambda_ps = lambda;
    cfg.tau = tau;
    tape.backward(model::loss(out, doc.label, cfg, bound, model).total);
    return g;
  }

  model::Gradients psr_gradient(double lambda, double tau) const {
    auto with = gradient(lambda, tau);
    const auto without = gradient(0.0, tau);
    for (std::size_t i = 0; i < with.per_param.size(); ++i)
      for (std::size_t k = 0; k < with.per_param[i].size(); ++k) with.per_param[i][k] -= without.per_param[i][k];
    return with;
  }
};

Result psr_behavior() {
  PsrInstance inst;
  inst.model.qubits = 3;
  inst.model.window = 4;
  inst.model.layers = 1;
  inst.model.ff_layers = 1;
  inst.model.degree = 3;
  inst.model.embed_dim = 4;
  inst.model.hidden = 4;
  inst.model.dropout = 0.0;
  inst.params = model::init_params(inst.model, 8, 5);
  inst.doc.ids = {2, 3, 4, 5, 6, 7};
  inst.doc.windows = data::make_windows(inst.doc.ids, 4, 4);

  const double start = inst.mean_pre_norm();
  const double tau = std::abs(start - 0.5) > 0.1 ? 0.5 : (start > 0.5 ? 0.2 : 0.8);
  const double lambda = 0.1, lr = 0.5;
  std::vector<double> gaps{std::abs(start - tau)};
  for (int step = 0; step < 50; ++step) {
    const auto g = inst.psr_gradient(lambda, tau);
    for (std::size_t i = 0; i < inst.params.list.size(); ++i) {
      auto& p = inst.params.list[i];
      for (std::size_t k = 0; k < p.value.size(); ++k) {
        const auto d = lr * g.per_param[i][k];
        p.value[k] -= p.real_valued ? ad::cplx(d.real(), 0.0) : d;
      }
    }
    gaps.push_back(std::abs(inst.mean_pre_norm() - tau));
  }
  bool monotone = true;
  for (std::size_t t = 5; t + 1 < gaps.size(); ++t) monotone = monotone && gaps[t + 1] <= gaps[t];

  // At tau equal to the current mean pre-norm the term contributes nothing.
  const auto at_tau = inst.psr_gradient(lambda, inst.mean_pre_norm());
  double residual = 0;
  for (const auto& g : at_tau.per_param)
    for (auto x : g) residual = std::max(residual, std::abs(x));

  const bool ok = monotone && gaps.back() < gaps.front() && residual <= 1e-12;
  return verdict(ok, fmt("|pre_norm - tau|: %.4f -> %.4f after 50 steps (tau %.2f), monotone after step 5: %s; "
                         "gradient at tau %.1e",
                         gaps.front(), gaps.back(), tau, monotone ? "yes" : "no", residual));
}

Result learnability() {
  const auto t0 = Clock::now();
  json doc = load_json("synthetic_majority.json");
  doc["output_dir"] = scratch("synthetic").string();
  const RunConfig cfg = parse_config(doc);
  const json rep = app::run_train(cfg);
  const double acc = rep["test"]["accuracy"];
  const double secs = seconds_since(t0);
  const bool ok = acc >= 0.95 && rep["epochs"].get<int>() <= 30 && secs < 900.0;
  return verdict(ok, fmt("test accuracy %.4f (best epoch %d of %d), %zu/%zu/%zu docs, %.1f s", acc,
                         rep["best_epoch"].get<int>(), rep["epochs"].get<int>(),
                         cfg.data.synthetic->size * 8 / 10, cfg.data.synthetic->size / 10,
                         cfg.data.synthetic->size / 10, secs));
}

// Reads GLUE SST-2 (header "sentence<TAB>label") or label<TAB>text rows.
std::vector<data::Record> read_sst2(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::vector<data::Record> out;
  std::string line;
  bool glue = false, first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      first = false;
      if (line.rfind("sentence\t", 0) == 0) {
        glue = true;
        continue;
      }
    }
    const auto tab = glue ? line.rfind('\t') : line.find('\t');
    if (line.empty() || tab == std::string::npos) continue;
    const std::string label = glue ? line.substr(tab + 1) : line.substr(0, tab);
    const std::string text = glue ? line.substr(0, tab) : line.substr(tab + 1);
    out.push_back({static_cast<std::size_t>(std::stoul(label)), text});
  }
  return out;
}

Result sst2_proxy() {
  const char* dir = std::getenv("CLAQS_SST2_DIR");
  if (!dir || !*dir) return {Outcome::Skip, "CLAQS_SST2_DIR not set; SST-2 train.tsv/dev.tsv are not available offline"};
  const fs::path src(dir);
  if (!fs::exists(src / "train.tsv") || !fs::exists(src / "dev.tsv")) {
    return {Outcome::Skip, "CLAQS_SST2_DIR lacks train.tsv and dev.tsv"};
  }
  const auto t0 = Clock::now();
  auto train_rows = read_sst2(src / "train.tsv");
  auto dev_rows = read_sst2(src / "dev.tsv");
  if (train_rows.size() < 2250 || dev_rows.size() < 500) return verdict(false, "SST-2 files are too small");
  Rng rng(7);
  rng.shuffle(train_rows);
  rng.shuffle(dev_rows);
  const std::vector<data::Record> train(train_rows.begin(), train_rows.begin() + 2000);
  const std::vector<data::Record> val(train_rows.begin() + 2000, train_rows.begin() + 2250);
  const std::vector<data::Record> test(dev_rows.begin(), dev_rows.begin() + 500);
  const fs::path work = scratch("sst2");
  data::write_tsv(work / "train.tsv", train);
  data::write_tsv(work / "val.tsv", val);
  data::write_tsv(work / "test.tsv", test);

  json doc = load_json("sst2_proxy.json");
  doc["output_dir"] = (work / "run").string();
  doc["data"]["train"] = (work / "train.tsv").string();
  doc["data"]["val"] = (work / "val.tsv").string();
  doc["data"]["test"] = (work / "test.tsv").string();
  const json rep = app::run_train(parse_config(doc));

  std::size_t ones = 0;
  for (const auto& r : test) ones += r.label;
  const double majority = std::max(ones, test.size() - ones) / static_cast<double>(test.size());
  const double acc = rep["test"]["accuracy"];
  const double secs = seconds_since(t0);
  return verdict(acc >= majority + 0.15 && secs < 3600.0,
                 fmt("test accuracy %.4f vs majority %.4f (+%.1f points), %.0f s", acc, majority,
                     100.0 * (acc - majority), secs));
}

Result parameter_accounting() {
  json doc = load_json("param_accounting.json");
  const json big = app::run_params(parse_config(doc));
  doc["model"]["window"] = 128;
  const json small = app::run_params(parse_config(doc));
  // n + (d+1) + 4 l_ff q with d=5, l_ff=6, q=8.
  const std::size_t want_big = 256 + 6 + 4 * 6 * 8, want_small = 128 + 6 + 4 * 6 * 8;
  const std::size_t got_big = big["attention"]["complex_as_one"], got_small = small["attention"]["complex_as_one"];
  const std::size_t two_n = big["attention"]["complex_as_two"];
  const bool ok = got_big == want_big && got_small == want_small && want_big == 454 && want_small == 326 &&
                  big["reference_totals"]["delta_exact"] == true && big["attention"]["matches_reference"] == true &&
                  two_n == 2 * 256 + 2 * 6 + 192 && big["reference_totals"]["discrepancy"].get<std::string>().size() > 0;
  return verdict(ok, fmt("n=256: %zu, n=128: %zu, delta %zu; 2n accounting gives %zu (flagged)", got_big,
                         got_small, got_big - got_small, two_n));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

struct TimedMixer {
  std::size_t n, d;
  std::vector<std::vector<dense::cplx>> angles;
  std::vector<dense::cplx> b, c;
  std::vector<dense::cplx> phi;
};

Result complexity_scaling() {
  constexpr std::size_t q = 8, layers = 3, ff_layers = 6, runs = 20, reps = 3;
  Rng rng(909);
  auto make = [&](std::size_t n, std::size_t d) {
    TimedMixer m{n, d, {}, random_complex(rng, n), random_complex(rng, d + 1), {}};
    for (std::size_t j = 0; j < n; ++j) {
      const auto a = random_angles(rng, 4 * layers * q);
      m.angles.emplace_back(a.begin(), a.end());
    }
    const auto phi = random_angles(rng, 4 * ff_layers * q);
    m.phi.assign(phi.begin(), phi.end());
    return m;
  };
  auto time_one = [&](const TimedMixer& m) {
    const auto t0 = Clock::now();
    for (std::size_t r = 0; r < reps; ++r) {
      ad::Tape tape;
      std::vector<ad::Tensor> angles;
      for (const auto& a : m.angles) angles.push_back(tape.constant({a.size()}, a));
      const mix::MixerParams p{tape.constant({m.n}, m.b), tape.constant({m.d + 1}, m.c),
                               tape.constant({m.phi.size()}, m.phi)};
      const auto out = mix::mix_window(angles, p, {q, layers, ff_layers, true});
      if (!std::isfinite(out.pre_norm.item().real())) throw Error(ErrorKind::Divergence, "non-finite mixer output");
    }
    return seconds_since(t0);
  };
  const auto base = make(8, 3), deeper = make(8, 6), wider = make(16, 3);
  time_one(base);  // warm-up
  std::vector<double> tb, td, tw;
  for (std::size_t r = 0; r < runs; ++r) {
    tb.push_back(time_one(base));
    td.push_back(time_one(deeper));
    tw.push_back(time_one(wider));
  }
  const double rd = median(td) / median(tb), rn = median(tw) / median(tb);
  const bool ok = rd >= 1.5 && rd <= 2.5 && rn >= 1.5 && rn <= 2.5;
  return verdict(ok, fmt("median forward %.2f ms (n=8,d=3); d 3->6 x%.2f, n 8->16 x%.2f", 1e3 * median(tb) / reps,
                         rd, rn));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Result determinism() {
  json doc = load_json("synthetic_majority.json");
  const fs::path dir = scratch("determinism");
  doc["output_dir"] = dir.string();
  doc["optimizer"]["epochs"] = 3;
  doc["data"]["synthetic"]["size"] = 500;
  doc["workers"] = 2;
  const RunConfig cfg = parse_config(doc);
  app::run_train(cfg);
  const std::string first = read_file(dir / "metrics.jsonl"), first_ckpt = read_file(dir / "checkpoint.bin");
  app::run_train(cfg);
  const std::string second = read_file(dir / "metrics.jsonl"), second_ckpt = read_file(dir / "checkpoint.bin");
  const auto lines = std::count(first.begin(), first.end(), '\n');
  return verdict(!first.empty() && first == second && first_ckpt == second_ckpt,
                 fmt("metrics.jsonl (%ld records) %s, checkpoint %s", static_cast<long>(lines),
                     first == second ? "byte-identical" : "DIFFERS",
                     first_ckpt == second_ckpt ? "byte-identical" : "DIFFERS"));
}

struct Criterion {
  int id;
  const char* name;
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "unitarity", unitarity},
      {2, "oracle equivalence", oracle_equivalence},
      {3, "l1 invariant", l1_invariant},
      {4, "gradient check", gradient_check},
      {5, "PSR behavior", psr_behavior},
      {6, "learnability (synthetic)", learnability},
      {7, "SST-2 desk proxy", sst2_proxy},
      {8, "parameter accounting", parameter_accounting},
      {9, "complexity scaling", complexity_scaling},
      {10, "determinism", determinism},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > 10) {
    std::fprintf(stderr, "criterion must lie in 1..10\n");
    return 2;
  }
  int failed = 0, skipped = 0;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {Outcome::Fail, std::string("error: ") + e.what()};
    }
    const char* tag = r.outcome == Outcome::Pass ? "PASS" : r.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    std::printf("criterion %d: %s  %s: %s\n", c.id, tag, c.name, r.detail.c_str());
    std::fflush(stdout);
    failed += r.outcome == Outcome::Fail;
    skipped += r.outcome == Outcome::Skip;
  }
  if (failed) return 1;
  if (only && skipped) return 77;
  return 0;
}
