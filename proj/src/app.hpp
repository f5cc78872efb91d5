#pragma once

// Command implementations shared by the C API and the CLI. Each returns a JSON
// report that embeds the resolved config; failures surface as claqs::Error.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "config.hpp"

namespace claqs::app {

/// Trains, writing config.json, metrics.jsonl and checkpoint.bin (best
/// validation epoch) under cfg.output_dir.
nlohmann::json run_train(const RunConfig& cfg);

/// Scores a checkpoint on the configured test split. The model architecture and
/// vocabulary come from the checkpoint.
nlohmann::json run_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint);

/// Analytic gradients of the full loss against central differences on a random
/// document. `corrupt_group` scales that group's analytic gradient by 1.01.
nlohmann::json run_gradcheck(const RunConfig& cfg, const std::string& corrupt_group = {});

/// Dense-matrix oracle sweep over cfg.verify.seeds random instances.
nlohmann::json run_verify(const RunConfig& cfg);

nlohmann::json run_params(const RunConfig& cfg);

/// Writes train.tsv, val.tsv and test.tsv for the synthetic task.
nlohmann::json run_synth(const RunConfig& cfg);

inline constexpr std::size_t kGradcheckMaxQubits = 6;
inline constexpr std::size_t kGradcheckMaxWindow = 8;
inline constexpr std::size_t kVerifyMaxQubits = 3;
inline constexpr double kGradcheckStep = 1e-5;
inline constexpr double kGradcheckTolerance = 1e-4;
inline constexpr double kGradcheckAbsFloor = 1e-6;
inline constexpr double kVerifyTolerance = 1e-10;

}  // namespace claqs::app
