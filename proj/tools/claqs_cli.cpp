// Command-line front end over the C API. Reports go to stdout as JSON;
// diagnostics go to stderr. The exit status is the claqs_status code.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "claqs/claqs.h"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  std::string checkpoint;
  std::string corrupt_group;
};

void add_common(CLI::App* cmd, Options& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "Config file (JSON)");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "Override the run seed");
  cmd->add_option("--out", o.out, "Override the output directory");
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

int fail(claqs_status st) {
  std::fprintf(stderr, "claqs: %s: %s\n", claqs_status_name(st), claqs_last_error());
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CLAQS quantum-inspired text classifier"};
  app.set_version_flag("--version", std::string(claqs_version()));
  app.require_subcommand(1);

  Options o;
  auto* train = app.add_subcommand("train", "Train and write checkpoint + metrics");
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  auto* gradcheck = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
  auto* verify = app.add_subcommand("verify", "Dense-matrix oracle checks (q <= 3)");
  auto* params = app.add_subcommand("params", "Attention parameter and qubit accounting");
  auto* synth = app.add_subcommand("synth", "Write the synthetic majority-token dataset");
  add_common(train, o, true);
  add_common(eval, o, true);
  add_common(gradcheck, o, false);
  add_common(verify, o, false);
  add_common(params, o, false);
  add_common(synth, o, false);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  gradcheck->add_option("--corrupt-group", o.corrupt_group,
                        "Test hook: perturb one group's analytic gradient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(CLAQS_ERR_ARGUMENT);
  }

  claqs_run* run = nullptr;
  claqs_status st = o.config.empty() ? claqs_run_from_json("{}", &run)
                                     : claqs_run_open(o.config.c_str(), &run);
  if (st != CLAQS_OK) return fail(st);
  if (o.seed) st = claqs_run_set_seed(run, *o.seed);
  if (st == CLAQS_OK && o.out) st = claqs_run_set_output_dir(run, o.out->c_str());
  if (st == CLAQS_OK && o.workers) st = claqs_run_set_workers(run, *o.workers);
  if (st != CLAQS_OK) {
    claqs_run_close(run);
    return fail(st);
  }

  char* report = nullptr;
  if (*train) {
    st = claqs_train(run, &report);
  } else if (*eval) {
    st = claqs_eval(run, o.checkpoint.c_str(), &report);
  } else if (*gradcheck) {
    st = o.corrupt_group.empty() ? claqs_gradcheck(run, &report)
                                 : claqs_gradcheck_corrupted(run, o.corrupt_group.c_str(), &report);
  } else if (*verify) {
    st = claqs_verify(run, &report);
  } else if (*params) {
    st = claqs_params(run, &report);
  } else {
    st = claqs_synth(run, &report);
  }
  claqs_run_close(run);

  if (report) {
    std::printf("%s\n", report);
    claqs_string_free(report);
  }
  if (st == CLAQS_CHECK_FAILED) {
    std::fprintf(stderr, "claqs: FAIL\n");
    return static_cast<int>(st);
  }
  if (st != CLAQS_OK) return fail(st);
  if (*gradcheck || *verify) std::fprintf(stderr, "claqs: PASS\n");
  return 0;
}
