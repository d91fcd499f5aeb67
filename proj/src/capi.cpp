#include "llmgp.h"

#include <exception>
#include <string>

#include "llmgp/harness.hpp"

struct llmgp_config {
  llmgp::RunConfig cfg;
};

struct llmgp_result {
  llmgp::BatchResult batch;
  llmgp::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& what) {
  g_last_error = what;
  return code;
}

bool valid_run(const llmgp_result* result, int run) {
  return result && run >= 0 && run < static_cast<int>(result->batch.runs.size());
}

bool io_message(const std::string& what) {
  return what.rfind("cannot", 0) == 0;
}

}  // namespace

extern "C" {

const char* llmgp_version(void) { return "0.1.0"; }

const char* llmgp_last_error(void) { return g_last_error.c_str(); }

llmgp_config* llmgp_config_new(void) { return new llmgp_config(); }

void llmgp_config_free(llmgp_config* config) { delete config; }

int llmgp_config_set(llmgp_config* config, const char* key, const char* value) {
  if (!config || !key || !value)
    return fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_config_set: null argument");
  try {
    llmgp::apply_setting(config->cfg, key, value);
    return LLMGP_OK;
  } catch (const llmgp::ConfigError& e) {
    return fail(LLMGP_ERR_CONFIG, e.what());
  }
}

int llmgp_config_load_file(llmgp_config* config, const char* path) {
  if (!config || !path)
    return fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_config_load_file: null argument");
  try {
    llmgp::apply_config(config->cfg, llmgp::parse_config_file(path));
    return LLMGP_OK;
  } catch (const llmgp::ConfigError& e) {
    return fail(io_message(e.what()) ? LLMGP_ERR_IO : LLMGP_ERR_CONFIG, e.what());
  }
}

int llmgp_run(const llmgp_config* config, llmgp_result** out_result) {
  if (!config || !out_result)
    return fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_run: null argument");
  *out_result = nullptr;
  try {
    auto* result = new llmgp_result();
    result->cfg = config->cfg;
    result->batch = llmgp::run_batch(config->cfg);
    *out_result = result;
    return LLMGP_OK;
  } catch (const llmgp::ConfigError& e) {
    return fail(LLMGP_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(io_message(e.what()) ? LLMGP_ERR_IO : LLMGP_ERR_RUN, e.what());
  }
}

int llmgp_result_run_count(const llmgp_result* result) {
  return result ? static_cast<int>(result->batch.runs.size()) : 0;
}

const char* llmgp_result_best_genotype(const llmgp_result* result, int run) {
  if (!valid_run(result, run)) {
    fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_result_best_genotype: bad run index");
    return nullptr;
  }
  return result->batch.runs[run].best_genotype.c_str();
}

int llmgp_result_best_fitness(const llmgp_result* result, int run, const char* split,
                              double* out_fitness) {
  if (!valid_run(result, run) || !split || !out_fitness)
    return fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_result_best_fitness: bad argument");
  const llmgp::RunResult& r = result->batch.runs[run];
  std::string s(split);
  if (s == "train") *out_fitness = r.best_train_fitness;
  else if (s == "test") *out_fitness = r.best_test_fitness;
  else if (s == "holdout") *out_fitness = r.best_holdout_fitness;
  else return fail(LLMGP_ERR_INVALID_ARGUMENT, "unknown split: " + s);
  return LLMGP_OK;
}

long llmgp_result_fe_events(const llmgp_result* result, int run) {
  return valid_run(result, run) ? result->batch.runs[run].fe_events : -1;
}

double llmgp_result_cost_usd(const llmgp_result* result, int run) {
  return valid_run(result, run) ? result->batch.runs[run].cost_usd : -1.0;
}

const char* llmgp_result_stop_reason(const llmgp_result* result, int run) {
  if (!valid_run(result, run)) {
    fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_result_stop_reason: bad run index");
    return nullptr;
  }
  return llmgp::to_string(result->batch.runs[run].stop_reason);
}

int llmgp_result_write_reports(const llmgp_result* result, const char* out_dir) {
  if (!result || !out_dir)
    return fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_result_write_reports: null argument");
  try {
    llmgp::write_reports(result->batch, out_dir);
    return LLMGP_OK;
  } catch (const std::exception& e) {
    return fail(LLMGP_ERR_IO, e.what());
  }
}

int llmgp_result_save(const llmgp_result* result, const char* path) {
  if (!result || !path)
    return fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_result_save: null argument");
  try {
    llmgp::write_results_json(result->batch, result->cfg, path);
    return LLMGP_OK;
  } catch (const std::exception& e) {
    return fail(LLMGP_ERR_IO, e.what());
  }
}

void llmgp_result_free(llmgp_result* result) { delete result; }

int llmgp_report_from_file(const char* results_path, const char* out_dir) {
  if (!results_path || !out_dir)
    return fail(LLMGP_ERR_INVALID_ARGUMENT, "llmgp_report_from_file: null argument");
  try {
    llmgp::write_reports_from_file(results_path, out_dir);
    return LLMGP_OK;
  } catch (const std::exception& e) {
    return fail(io_message(e.what()) ? LLMGP_ERR_IO : LLMGP_ERR_RUN, e.what());
  }
}

}  // extern "C"
