#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "errors.hpp"

namespace claqs::train {

using nlohmann::json;

namespace {

// Splits [0, count) into contiguous chunks, one per worker, and runs them.
// Exceptions from workers are rethrown in worker order.
template <typename Fn>
void run_chunks(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    fn(0, 0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  const std::size_t per = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * per), end = std::min(count, begin + per);
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t argmax(std::span<const ad::cplx> logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i].real() > logits[best].real()) best = i;
  }
  return best;
}

std::vector<data::Record> load_split(const std::string& path, std::size_t classes,
                                     const char* name) {
  auto records = data::load_tsv(path, classes);
  if (records.empty()) throw Error(ErrorKind::Input, std::string(name) + " split " + path + " is empty");
  return records;
}

}  // namespace

Dataset load_dataset(const RunConfig& cfg) {
  data::Splits splits;
  if (cfg.data.synthetic) {
    const auto& s = *cfg.data.synthetic;
    splits = data::synth_majority(s.seed, s.size, s.length, s.vocab_size);
  } else {
    splits.train = load_split(cfg.data.train, cfg.model.classes, "train");
    splits.val = load_split(cfg.data.val, cfg.model.classes, "validation");
    if (!cfg.data.test.empty()) splits.test = load_split(cfg.data.test, cfg.model.classes, "test");
  }
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(splits.train.size());
  for (const auto& r : splits.train) corpus.push_back(data::tokenize(r.text));
  Dataset d;
  d.vocab = data::Vocab::build(corpus, cfg.data.min_freq, cfg.data.max_vocab);
  const std::size_t n = cfg.model.window, stride = cfg.model.effective_stride();
  d.train = data::encode(splits.train, d.vocab, n, stride);
  d.val = data::encode(splits.val, d.vocab, n, stride);
  d.test = data::encode(splits.test, d.vocab, n, stride);
  return d;
}

json to_json(const Metrics& m) {
  return {{"count", m.count},         {"loss", m.loss},           {"accuracy", m.accuracy},
          {"precision", m.precision}, {"recall", m.recall},       {"macro_f1", m.macro_f1},
          {"mean_pre_norm", m.mean_pre_norm}};
}

json to_json(const EpochRecord& r) {
  return {{"kind", "epoch"}, {"epoch", r.epoch},          {"step", r.step},
          {"lr", r.lr},      {"train_loss", r.train_loss}, {"val", to_json(r.val)}};
}

Metrics classification_metrics(const std::vector<std::size_t>& predicted,
                               const std::vector<std::size_t>& truth, std::size_t classes) {
  Metrics m;
  m.count = truth.size();
  if (truth.empty()) return m;
  std::vector<double> tp(classes), fp(classes), fn(classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) {
      ++correct;
      tp[truth[i]] += 1;
    } else {
      fp[predicted[i]] += 1;
      fn[truth[i]] += 1;
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  for (std::size_t c = 0; c < classes; ++c) {
    const double p = tp[c] + fp[c] > 0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
    const double r = tp[c] + fn[c] > 0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
    m.precision += p;
    m.recall += r;
    m.macro_f1 += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  m.precision /= static_cast<double>(classes);
  m.recall /= static_cast<double>(classes);
  m.macro_f1 /= static_cast<double>(classes);
  return m;
}

Metrics evaluate(const model::Parameters& params, const std::vector<data::Document>& docs,
                 const RunConfig& cfg) {
  std::vector<std::size_t> predicted(docs.size()), truth(docs.size());
  std::vector<double> losses(docs.size()), norms(docs.size());
  run_chunks(docs.size(), cfg.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ad::Tape tape;
      const auto bound = model::bind(tape, params, nullptr);
      const auto out = model::forward_document(docs[i], bound, cfg.model);
      const auto terms = model::loss(out, docs[i].label, cfg.loss, bound, cfg.model);
      predicted[i] = argmax(out.logits.values());
      truth[i] = docs[i].label;
      losses[i] = terms.total.item().real();
      norms[i] = out.mean_pre_norm.item().real();
    }
  });
  Metrics m = classification_metrics(predicted, truth, cfg.model.classes);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    m.loss += losses[i];
    m.mean_pre_norm += norms[i];
  }
  if (!docs.empty()) {
    m.loss /= static_cast<double>(docs.size());
    m.mean_pre_norm /= static_cast<double>(docs.size());
  }
  return m;
}

double cosine_lr(std::size_t step, std::size_t total_steps, double lr_max, double lr_min) {
  if (total_steps <= 1) return lr_max;
  const double t = static_cast<double>(std::min(step, total_steps - 1)) /
                   static_cast<double>(total_steps - 1);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * t));
}

AdamW::AdamW(const model::Parameters& params, const OptimConfig& cfg) : cfg_(cfg) {
  for (const auto& p : params.list) {
    m_.emplace_back(p.real_count(), 0.0);
    v_.emplace_back(p.real_count(), 0.0);
  }
}

void AdamW::step(model::Parameters& params, const model::Gradients& grads, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.list.size(); ++i) {
    auto& p = params.list[i];
    const auto& g = grads.per_param[i];
    auto& m = m_[i];
    auto& v = v_[i];
    const std::size_t parts = p.real_valued ? 1 : 2;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      double comp[2] = {p.value[k].real(), p.value[k].imag()};
      const double gc[2] = {g[k].real(), g[k].imag()};
      for (std::size_t r = 0; r < parts; ++r) {
        const std::size_t s = k * parts + r;
        m[s] = cfg_.beta1 * m[s] + (1.0 - cfg_.beta1) * gc[r];
        v[s] = cfg_.beta2 * v[s] + (1.0 - cfg_.beta2) * gc[r] * gc[r];
        if (p.decay) comp[r] -= lr * cfg_.weight_decay * comp[r];
        comp[r] -= lr * (m[s] / bc1) / (std::sqrt(v[s] / bc2) + cfg_.eps);
      }
      p.value[k] = p.real_valued ? ad::cplx(comp[0], 0.0) : ad::cplx(comp[0], comp[1]);
    }
  }
}

double batch_gradient(const model::Parameters& params,
                      const std::vector<const data::Document*>& docs, const RunConfig& cfg,
                      std::uint64_t dropout_seed, bool training, model::Gradients& grads) {
  if (docs.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(docs.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, docs.size()));
  std::vector<model::Gradients> partial(workers, model::Gradients(params));
  std::vector<double> losses(docs.size());
  run_chunks(docs.size(), workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ad::Tape tape;
      const auto bound = model::bind(tape, params, &partial[w]);
      Rng rng(model::mix_seed(dropout_seed, i));
      const auto out = model::forward_document(*docs[i], bound, cfg.model, training ? &rng : nullptr);
      const auto terms = model::loss(out, docs[i]->label, cfg.loss, bound, cfg.model);
      const double value = terms.total.item().real();
      if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "non-finite loss (" << value
           << "); mean pre_norm = " << out.mean_pre_norm.item().real();
        throw Error(ErrorKind::Divergence, os.str());
      }
      losses[i] = value;
      tape.backward(ad::scale(terms.total, inv));
    }
  });
  for (const auto& p : partial) grads.add(p);
  double mean = 0.0;
  for (double l : losses) mean += l;
  return mean * inv;
}

TrainResult train(const RunConfig& cfg, const Dataset& data, model::Parameters params,
                  const EpochCallback& on_epoch) {
  if (data.train.empty() || data.val.empty()) {
    throw Error(ErrorKind::Input, "train and validation splits must be non-empty");
  }
  TrainResult result;
  result.initial = evaluate(params, data.val, cfg);
  result.best_params = params;

  const std::size_t batch = cfg.optim.batch;
  const std::size_t per_epoch = (data.train.size() + batch - 1) / batch;
  const std::size_t total = per_epoch * cfg.optim.epochs;
  AdamW opt(params, cfg.optim);
  Rng rng(model::mix_seed(cfg.seed, 0x7261696eULL));
  std::vector<std::size_t> order(data.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  double best_accuracy = -1.0;
  std::size_t step = 0;
  model::Gradients grads(params);
  for (std::size_t epoch = 1; epoch <= cfg.optim.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    double lr = cfg.optim.lr_max;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<const data::Document*> docs;
      for (std::size_t i = start; i < end; ++i) docs.push_back(&data.train[order[i]]);
      grads.zero();
      const double mean = batch_gradient(params, docs, cfg, rng.below(~0ULL), true, grads);
      for (const auto& g : grads.per_param) {
        for (auto v : g) {
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw Error(ErrorKind::Divergence, "non-finite gradient at step " + std::to_string(step));
          }
        }
      }
      lr = cosine_lr(step, total, cfg.optim.lr_max, cfg.optim.lr_min);
      opt.step(params, grads, lr);
      loss_sum += mean * static_cast<double>(docs.size());
      ++step;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = step;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val = evaluate(params, data.val, cfg);
    const bool improved = rec.val.accuracy > best_accuracy;
    if (improved) {
      best_accuracy = rec.val.accuracy;
      result.best_params = params;
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec, params, improved, step, rng.state());
  }
  result.final_params = std::move(params);
  result.steps = step;
  result.rng_state = rng.state();
  return result;
}

}  // namespace claqs::train
