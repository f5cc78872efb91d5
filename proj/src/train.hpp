#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "data.hpp"
#include "model.hpp"

namespace claqs::train {

struct Dataset {
  data::Vocab vocab;
  std::vector<data::Document> train, val, test;
};

/// Loads (or synthesizes) the splits named in the config, builds the vocabulary
/// from the training split, and segments every document into windows.
Dataset load_dataset(const RunConfig& cfg);

struct Metrics {
  std::size_t count = 0;
  double loss = 0;
  double accuracy = 0;
  double precision = 0;  // macro over classes
  double recall = 0;     // macro over classes
  double macro_f1 = 0;
  double mean_pre_norm = 0;
};

nlohmann::json to_json(const Metrics& m);

/// Classification metrics from predicted and true labels.
Metrics classification_metrics(const std::vector<std::size_t>& predicted,
                               const std::vector<std::size_t>& truth, std::size_t classes);

Metrics evaluate(const model::Parameters& params, const std::vector<data::Document>& docs,
                 const RunConfig& cfg);

/// lr_min + (lr_max - lr_min) (1 + cos(pi t / (T - 1))) / 2 for t in [0, T).
double cosine_lr(std::size_t step, std::size_t total_steps, double lr_max, double lr_min);

class AdamW {
 public:
  AdamW(const model::Parameters& params, const OptimConfig& cfg);

  /// One update. Real-valued parameters move only along their real part;
  /// complex ones are updated as independent (Re, Im) pairs.
  void step(model::Parameters& params, const model::Gradients& grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  OptimConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double lr = 0;
  double train_loss = 0;
  Metrics val;
};

nlohmann::json to_json(const EpochRecord& r);

struct TrainResult {
  Metrics initial;
  std::vector<EpochRecord> history;
  model::Parameters final_params;
  model::Parameters best_params;
  std::size_t best_epoch = 0;
  std::size_t steps = 0;
  std::string rng_state;
};

using EpochCallback = std::function<void(const EpochRecord&, const model::Parameters& params,
                                         bool improved, std::size_t step,
                                         const std::string& rng_state)>;

/// Minibatch AdamW with cosine annealing. The best parameters are chosen by
/// validation accuracy. Raises a divergence error on a non-finite loss.
TrainResult train(const RunConfig& cfg, const Dataset& data, model::Parameters params,
                  const EpochCallback& on_epoch = {});

/// Gradient of the mean batch loss over `docs`, summed into `grads`. Returns
/// the mean loss.
double batch_gradient(const model::Parameters& params, const std::vector<const data::Document*>& docs,
                      const RunConfig& cfg, std::uint64_t dropout_seed, bool training,
                      model::Gradients& grads);

}  // namespace claqs::train
