#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace claqs {

enum class Aggregation { MeanLogits, AttentionPool };

const char* to_string(Aggregation a);

struct ModelConfig {
  std::size_t qubits = 8;
  std::size_t window = 16;
  std::size_t stride = 0;  // 0 means non-overlapping (stride == window)
  std::size_t layers = 3;
  std::size_t ff_layers = 6;
  std::size_t degree = 5;
  std::size_t embed_dim = 32;
  std::size_t hidden = 64;
  std::size_t classes = 2;
  double dropout = 0.1;
  Aggregation aggregation = Aggregation::MeanLogits;
  std::vector<std::uint8_t> measurement_mask;  // empty: no mask; else length 3q, 1 keeps
  bool normalize_lcu = true;

  std::size_t effective_stride() const { return stride == 0 ? window : stride; }
  std::size_t angle_count() const { return 4 * layers * qubits; }
  std::size_t ff_angle_count() const { return 4 * ff_layers * qubits; }
};

struct LossConfig {
  double tau = 0.5;
  double lambda_ps = 0.1;
  double lambda_l1 = 0.0;
  double lambda_qsvt_smooth = 0.0;
  double lambda_qsvt_l2 = 0.0;
};

struct OptimConfig {
  double lr_max = 1e-3;
  double lr_min = 1e-5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch = 32;
  std::size_t epochs = 10;
};

struct SyntheticConfig {
  std::size_t size = 2500;
  std::size_t length = 8;
  std::size_t vocab_size = 8;
  std::uint64_t seed = 0;
};

struct DataConfig {
  std::string train;
  std::string val;
  std::string test;
  std::size_t min_freq = 2;
  std::size_t max_vocab = 20000;
  std::optional<SyntheticConfig> synthetic;
};

struct InitConfig {
  double noise_scale = 1.0;
};

struct VerifyConfig {
  std::size_t seeds = 50;
};

struct GradcheckConfig {
  std::size_t vocab_size = 12;
  std::size_t doc_length = 0;  // 0: one and a half windows
  double jitter = 0.3;
};

struct RunConfig {
  ModelConfig model;
  LossConfig loss;
  OptimConfig optim;
  DataConfig data;
  InitConfig init;
  VerifyConfig verify;
  GradcheckConfig gradcheck;
  std::uint64_t seed = 0;
  std::string output_dir = "claqs_run";
  std::size_t workers = 1;
};

/// Parses and validates a config document. Missing fields take defaults;
/// unknown keys and invalid values are collected and reported together.
RunConfig parse_config(const nlohmann::json& doc);
/// Raw JSON of a config file; syntax errors are reported as config errors.
nlohmann::json read_config_document(const std::filesystem::path& path);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Checks that training inputs are configured; every problem is listed.
void require_training_data(const RunConfig& cfg, bool need_train);

}  // namespace claqs
