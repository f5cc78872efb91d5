#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace claqs {

using nlohmann::json;

const char* to_string(Aggregation a) {
  return a == Aggregation::MeanLogits ? "mean_logits" : "attention_pool";
}

namespace {

// Reads fields from one JSON object, recording every problem under its dotted path.
class Section {
 public:
  Section(const json* obj, std::string prefix, std::vector<std::string>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {
    if (obj_ && !obj_->is_object()) {
      errors_.push_back(path_of("") + ": expected an object");
      obj_ = nullptr;
    }
  }

  ~Section() {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!known_.count(it.key())) errors_.push_back(path_of(it.key()) + ": unknown key");
    }
  }

  const json* child(const std::string& key) {
    known_.insert(key);
    if (!obj_) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() || it->is_null() ? nullptr : &*it;
  }

  std::string path_of(const std::string& key) const {
    if (key.empty()) return prefix_.empty() ? "<root>" : prefix_;
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  void count(const std::string& key, std::size_t& out, std::size_t min = 0) {
    const json* v = child(key);
    if (!v) return;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      errors_.push_back(path_of(key) + ": expected a non-negative integer");
      return;
    }
    out = v->get<std::size_t>();
    if (out < min) errors_.push_back(path_of(key) + ": must be >= " + std::to_string(min));
  }

  void u64(const std::string& key, std::uint64_t& out) {
    const json* v = child(key);
    if (!v) return;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
      errors_.push_back(path_of(key) + ": expected a non-negative integer");
      return;
    }
    out = v->get<std::uint64_t>();
  }

  void real(const std::string& key, double& out) {
    const json* v = child(key);
    if (!v) return;
    if (!v->is_number()) {
      errors_.push_back(path_of(key) + ": expected a number");
      return;
    }
    out = v->get<double>();
  }

  void text(const std::string& key, std::string& out) {
    const json* v = child(key);
    if (!v) return;
    if (!v->is_string()) {
      errors_.push_back(path_of(key) + ": expected a string");
      return;
    }
    out = v->get<std::string>();
  }

  void flag(const std::string& key, bool& out) {
    const json* v = child(key);
    if (!v) return;
    if (!v->is_boolean()) {
      errors_.push_back(path_of(key) + ": expected true or false");
      return;
    }
    out = v->get<bool>();
  }

  void fail(const std::string& key, const std::string& msg) {
    errors_.push_back(path_of(key) + ": " + msg);
  }

 private:
  const json* obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

void read_model(Section& s, ModelConfig& m) {
  s.count("qubits", m.qubits);
  s.count("window", m.window);
  s.count("stride", m.stride);
  s.count("layers", m.layers);
  s.count("ff_layers", m.ff_layers);
  s.count("degree", m.degree);
  s.count("embed_dim", m.embed_dim);
  s.count("hidden", m.hidden);
  s.count("classes", m.classes);
  s.real("dropout", m.dropout);
  s.flag("normalize_lcu", m.normalize_lcu);
  if (const json* v = s.child("aggregation")) {
    if (*v == "mean_logits") {
      m.aggregation = Aggregation::MeanLogits;
    } else if (*v == "attention_pool") {
      m.aggregation = Aggregation::AttentionPool;
    } else {
      s.fail("aggregation", "expected \"mean_logits\" or \"attention_pool\"");
    }
  }
  if (const json* v = s.child("measurement_mask")) {
    if (!v->is_array()) {
      s.fail("measurement_mask", "expected an array of booleans or 0/1");
    } else {
      m.measurement_mask.clear();
      for (const auto& e : *v) {
        if (e.is_boolean()) {
          m.measurement_mask.push_back(e.get<bool>());
        } else if (e.is_number_integer() && (e == 0 || e == 1)) {
          m.measurement_mask.push_back(e.get<int>());
        } else {
          s.fail("measurement_mask", "entries must be booleans or 0/1");
          break;
        }
      }
    }
  }
  if (m.qubits < 2 || m.qubits > 14) s.fail("qubits", "must lie in [2, 14]");
  if (m.window < 1) s.fail("window", "must be >= 1");
  if (m.layers < 1) s.fail("layers", "must be >= 1");
  if (m.ff_layers < 1) s.fail("ff_layers", "must be >= 1");
  if (m.degree < 1) s.fail("degree", "must be >= 1");
  if (m.embed_dim < 1) s.fail("embed_dim", "must be >= 1");
  if (m.hidden < 1) s.fail("hidden", "must be >= 1");
  if (m.classes < 2) s.fail("classes", "must be >= 2");
  if (!(m.dropout >= 0.0 && m.dropout < 1.0)) s.fail("dropout", "must lie in [0, 1)");
  if (!m.measurement_mask.empty() && m.measurement_mask.size() != 3 * m.qubits) {
    s.fail("measurement_mask", "length must equal 3 * qubits = " + std::to_string(3 * m.qubits));
  }
}

void read_loss(Section& s, LossConfig& l) {
  s.real("tau", l.tau);
  s.real("lambda_ps", l.lambda_ps);
  s.real("lambda_l1", l.lambda_l1);
  s.real("lambda_qsvt_smooth", l.lambda_qsvt_smooth);
  s.real("lambda_qsvt_l2", l.lambda_qsvt_l2);
  if (!(l.tau > 0.0 && l.tau < 1.0)) s.fail("tau", "must lie in (0, 1)");
  if (!(l.lambda_ps >= 0)) s.fail("lambda_ps", "must be >= 0");
  if (!(l.lambda_l1 >= 0)) s.fail("lambda_l1", "must be >= 0");
  if (!(l.lambda_qsvt_smooth >= 0)) s.fail("lambda_qsvt_smooth", "must be >= 0");
  if (!(l.lambda_qsvt_l2 >= 0)) s.fail("lambda_qsvt_l2", "must be >= 0");
}

void read_optim(Section& s, OptimConfig& o) {
  s.real("lr_max", o.lr_max);
  s.real("lr_min", o.lr_min);
  s.real("weight_decay", o.weight_decay);
  s.real("beta1", o.beta1);
  s.real("beta2", o.beta2);
  s.real("eps", o.eps);
  s.count("batch", o.batch);
  s.count("epochs", o.epochs);
  if (!(o.lr_max > 0)) s.fail("lr_max", "must be > 0");
  if (!(o.lr_min >= 0 && o.lr_min <= o.lr_max)) s.fail("lr_min", "must lie in [0, lr_max]");
  if (!(o.weight_decay >= 0)) s.fail("weight_decay", "must be >= 0");
  if (!(o.beta1 >= 0 && o.beta1 < 1)) s.fail("beta1", "must lie in [0, 1)");
  if (!(o.beta2 >= 0 && o.beta2 < 1)) s.fail("beta2", "must lie in [0, 1)");
  if (!(o.eps > 0)) s.fail("eps", "must be > 0");
  if (o.batch < 1) s.fail("batch", "must be >= 1");
}

void read_data(Section& s, DataConfig& d, std::vector<std::string>& errors, std::uint64_t seed) {
  s.text("train", d.train);
  s.text("val", d.val);
  s.text("test", d.test);
  s.count("min_freq", d.min_freq);
  s.count("max_vocab", d.max_vocab);
  if (d.max_vocab < 2) s.fail("max_vocab", "must be >= 2 (PAD and UNK)");
  if (const json* v = s.child("synthetic")) {
    SyntheticConfig syn;
    syn.seed = seed;
    Section ss(v, s.path_of("synthetic"), errors);
    ss.count("size", syn.size);
    ss.count("length", syn.length);
    ss.count("vocab_size", syn.vocab_size);
    ss.u64("seed", syn.seed);
    if (syn.size < 10) ss.fail("size", "must be >= 10 so every split is non-empty");
    if (syn.length < 1) ss.fail("length", "must be >= 1");
    if (syn.vocab_size < 2) ss.fail("vocab_size", "must be >= 2");
    d.synthetic = syn;
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  std::vector<std::string> errors;
  {
    Section root(&doc, "", errors);
    root.u64("seed", cfg.seed);
    root.text("output_dir", cfg.output_dir);
    root.count("workers", cfg.workers);
    if (cfg.workers < 1) root.fail("workers", "must be >= 1");
    {
      Section s(root.child("model"), "model", errors);
      read_model(s, cfg.model);
    }
    {
      Section s(root.child("loss"), "loss", errors);
      read_loss(s, cfg.loss);
    }
    {
      Section s(root.child("optimizer"), "optimizer", errors);
      read_optim(s, cfg.optim);
    }
    {
      Section s(root.child("data"), "data", errors);
      read_data(s, cfg.data, errors, cfg.seed);
    }
    {
      Section s(root.child("init"), "init", errors);
      s.real("noise_scale", cfg.init.noise_scale);
      if (!(cfg.init.noise_scale >= 0)) s.fail("noise_scale", "must be >= 0");
    }
    {
      Section s(root.child("verify"), "verify", errors);
      s.count("seeds", cfg.verify.seeds, 1);
    }
    {
      Section s(root.child("gradcheck"), "gradcheck", errors);
      s.count("vocab_size", cfg.gradcheck.vocab_size, 3);
      s.count("doc_length", cfg.gradcheck.doc_length);
      s.real("jitter", cfg.gradcheck.jitter);
    }
  }
  if (!errors.empty()) {
    std::ostringstream os;
    os << errors.size() << " invalid field(s):";
    for (const auto& e : errors) os << "\n  " << e;
    throw Error(ErrorKind::Config, os.str());
  }
  return cfg;
}

json read_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_config_document(path));
}

json to_json(const RunConfig& cfg) {
  const auto& m = cfg.model;
  json mask = nullptr;
  if (!m.measurement_mask.empty()) {
    mask = json::array();
    for (auto v : m.measurement_mask) mask.push_back(v != 0);
  }
  json data = {
      {"train", cfg.data.train},         {"val", cfg.data.val},
      {"test", cfg.data.test},           {"min_freq", cfg.data.min_freq},
      {"max_vocab", cfg.data.max_vocab}, {"synthetic", nullptr},
  };
  if (cfg.data.synthetic) {
    const auto& s = *cfg.data.synthetic;
    data["synthetic"] = {
        {"size", s.size}, {"length", s.length}, {"vocab_size", s.vocab_size}, {"seed", s.seed}};
  }
  return {
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir},
      {"workers", cfg.workers},
      {"model",
       {{"qubits", m.qubits},
        {"window", m.window},
        {"stride", m.effective_stride()},
        {"layers", m.layers},
        {"ff_layers", m.ff_layers},
        {"degree", m.degree},
        {"embed_dim", m.embed_dim},
        {"hidden", m.hidden},
        {"classes", m.classes},
        {"dropout", m.dropout},
        {"aggregation", to_string(m.aggregation)},
        {"measurement_mask", mask},
        {"normalize_lcu", m.normalize_lcu}}},
      {"loss",
       {{"tau", cfg.loss.tau},
        {"lambda_ps", cfg.loss.lambda_ps},
        {"lambda_l1", cfg.loss.lambda_l1},
        {"lambda_qsvt_smooth", cfg.loss.lambda_qsvt_smooth},
        {"lambda_qsvt_l2", cfg.loss.lambda_qsvt_l2}}},
      {"optimizer",
       {{"lr_max", cfg.optim.lr_max},
        {"lr_min", cfg.optim.lr_min},
        {"weight_decay", cfg.optim.weight_decay},
        {"beta1", cfg.optim.beta1},
        {"beta2", cfg.optim.beta2},
        {"eps", cfg.optim.eps},
        {"batch", cfg.optim.batch},
        {"epochs", cfg.optim.epochs}}},
      {"data", data},
      {"init", {{"noise_scale", cfg.init.noise_scale}}},
      {"verify", {{"seeds", cfg.verify.seeds}}},
      {"gradcheck",
       {{"vocab_size", cfg.gradcheck.vocab_size},
        {"doc_length", cfg.gradcheck.doc_length},
        {"jitter", cfg.gradcheck.jitter}}},
  };
}

void require_training_data(const RunConfig& cfg, bool need_train) {
  if (cfg.data.synthetic) return;
  std::vector<std::string> errors;
  if (need_train) {
    if (cfg.data.train.empty()) errors.push_back("data.train: required (path to label<TAB>text file)");
    if (cfg.data.val.empty()) errors.push_back("data.val: required (path to label<TAB>text file)");
  }
  if (cfg.data.test.empty()) errors.push_back("data.test: required (path to label<TAB>text file)");
  if (!errors.empty()) {
    std::ostringstream os;
    os << errors.size() << " invalid field(s):";
    for (const auto& e : errors) os << "\n  " << e;
    throw Error(ErrorKind::Config, os.str());
  }
}

}  // namespace claqs
