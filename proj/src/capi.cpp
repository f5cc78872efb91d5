#include "claqs/claqs.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "app.hpp"
#include "config.hpp"
#include "errors.hpp"

using nlohmann::json;

struct claqs_run {
  json document;
  claqs::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

claqs_status status_of(claqs::ErrorKind kind) {
  using claqs::ErrorKind;
  switch (kind) {
    case ErrorKind::Config: return CLAQS_ERR_CONFIG;
    case ErrorKind::Io:
    case ErrorKind::Parse:
    case ErrorKind::Input:
    case ErrorKind::Label: return CLAQS_ERR_DATA;
    case ErrorKind::Divergence:
    case ErrorKind::CollapsedState:
    case ErrorKind::DegenerateState:
    case ErrorKind::DegenerateCoefficient: return CLAQS_ERR_DIVERGENCE;
    case ErrorKind::Budget: return CLAQS_ERR_BUDGET;
    default: return CLAQS_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
claqs_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const claqs::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("config error: ") + e.what();
    return CLAQS_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return CLAQS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "internal error: unknown exception";
    return CLAQS_ERR_INTERNAL;
  }
}

claqs_status missing(const char* what) {
  g_last_error = std::string("argument error: ") + what + " is NULL";
  return CLAQS_ERR_ARGUMENT;
}

claqs_status open_document(json doc, claqs_run** out) {
  if (!out) return missing("out");
  *out = nullptr;
  return guard([&] {
    auto* run = new claqs_run{std::move(doc), {}};
    try {
      run->config = claqs::parse_config(run->document);
    } catch (...) {
      delete run;
      throw;
    }
    *out = run;
    return CLAQS_OK;
  });
}

claqs_status reparse(claqs_run* run) {
  run->config = claqs::parse_config(run->document);
  return CLAQS_OK;
}

template <typename Fn>
claqs_status command(claqs_run* run, char** report_out, Fn&& fn) {
  if (!run) return missing("run");
  if (!report_out) return missing("report_out");
  *report_out = nullptr;
  return guard([&] {
    const json report = fn(run->config);
    *report_out = dup(report.dump(2));
    if (report.contains("pass") && !report["pass"].get<bool>()) {
      g_last_error = "check failed";
      return CLAQS_CHECK_FAILED;
    }
    return CLAQS_OK;
  });
}

}  // namespace

extern "C" {

claqs_status claqs_run_open(const char* config_path, claqs_run** out) {
  if (!config_path) return missing("config_path");
  json doc;
  const claqs_status st = guard([&] {
    doc = claqs::read_config_document(config_path);
    return CLAQS_OK;
  });
  if (st != CLAQS_OK) {
    if (out) *out = nullptr;
    return st;
  }
  return open_document(std::move(doc), out);
}

claqs_status claqs_run_from_json(const char* config_json, claqs_run** out) {
  if (!config_json) return missing("config_json");
  json doc;
  const claqs_status st = guard([&] {
    try {
      doc = json::parse(config_json);
    } catch (const json::parse_error& e) {
      throw claqs::Error(claqs::ErrorKind::Config, e.what());
    }
    return CLAQS_OK;
  });
  if (st != CLAQS_OK) {
    if (out) *out = nullptr;
    return st;
  }
  return open_document(std::move(doc), out);
}

void claqs_run_close(claqs_run* run) { delete run; }

claqs_status claqs_run_set_seed(claqs_run* run, uint64_t seed) {
  if (!run) return missing("run");
  return guard([&] {
    run->document["seed"] = seed;
    return reparse(run);
  });
}

claqs_status claqs_run_set_output_dir(claqs_run* run, const char* dir) {
  if (!run) return missing("run");
  if (!dir) return missing("dir");
  return guard([&] {
    run->document["output_dir"] = dir;
    return reparse(run);
  });
}

claqs_status claqs_run_set_workers(claqs_run* run, size_t workers) {
  if (!run) return missing("run");
  return guard([&] {
    run->document["workers"] = workers;
    return reparse(run);
  });
}

claqs_status claqs_run_resolved_config(const claqs_run* run, char** json_out) {
  if (!run) return missing("run");
  if (!json_out) return missing("json_out");
  *json_out = nullptr;
  return guard([&] {
    *json_out = dup(claqs::to_json(run->config).dump(2));
    return CLAQS_OK;
  });
}

claqs_status claqs_train(claqs_run* run, char** report_out) {
  return command(run, report_out, [](const claqs::RunConfig& c) { return claqs::app::run_train(c); });
}

claqs_status claqs_eval(claqs_run* run, const char* checkpoint_path, char** report_out) {
  if (!checkpoint_path) return missing("checkpoint_path");
  return command(run, report_out, [&](const claqs::RunConfig& c) {
    return claqs::app::run_eval(c, checkpoint_path);
  });
}

claqs_status claqs_gradcheck(claqs_run* run, char** report_out) {
  return command(run, report_out,
                 [](const claqs::RunConfig& c) { return claqs::app::run_gradcheck(c); });
}

claqs_status claqs_gradcheck_corrupted(claqs_run* run, const char* group, char** report_out) {
  if (!group) return missing("group");
  return command(run, report_out, [&](const claqs::RunConfig& c) {
    return claqs::app::run_gradcheck(c, group);
  });
}

claqs_status claqs_verify(claqs_run* run, char** report_out) {
  return command(run, report_out, [](const claqs::RunConfig& c) { return claqs::app::run_verify(c); });
}

claqs_status claqs_params(claqs_run* run, char** report_out) {
  return command(run, report_out, [](const claqs::RunConfig& c) { return claqs::app::run_params(c); });
}

claqs_status claqs_synth(claqs_run* run, char** report_out) {
  return command(run, report_out, [](const claqs::RunConfig& c) { return claqs::app::run_synth(c); });
}

const char* claqs_last_error(void) { return g_last_error.c_str(); }

const char* claqs_status_name(claqs_status status) {
  switch (status) {
    case CLAQS_OK: return "ok";
    case CLAQS_ERR_INTERNAL: return "internal error";
    case CLAQS_ERR_CONFIG: return "config error";
    case CLAQS_ERR_DATA: return "data error";
    case CLAQS_ERR_DIVERGENCE: return "divergence";
    case CLAQS_ERR_BUDGET: return "budget refusal";
    case CLAQS_CHECK_FAILED: return "check failed";
    case CLAQS_ERR_ARGUMENT: return "argument error";
  }
  return "unknown status";
}

void claqs_string_free(char* s) { std::free(s); }

const char* claqs_version(void) { return "0.1.0"; }

}  // extern "C"
