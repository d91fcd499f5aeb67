#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "llmgp.h"

namespace {

// Settings apply lowest to highest: built-in defaults, then the --config
// file, then flags the user actually passed. The option pointers let
// apply_common tell "left at default" from "explicitly given".
struct CommonOpts {
  std::string variant;
  std::uint64_t seed = 1;
  std::string backend;
  std::string out_dir;
  std::string config_path;
  std::vector<std::string> overrides;
  CLI::Option* variant_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* backend_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  opts.variant_opt =
      cmd->add_option("--variant", opts.variant,
                      "random_search | tutorial_gp | llm_direct | llm_gp | llm_gp_mu_xo");
  opts.seed_opt = cmd->add_option("--seed", opts.seed, "base RNG seed");
  opts.backend_opt =
      cmd->add_option("--backend", opts.backend,
                      "none | mock_scripted | mock_generative | mock_faulty | remote_http");
  cmd->add_option("--out-dir", opts.out_dir, "directory for report files")->required();
  cmd->add_option("--config", opts.config_path, "key=value config file applied first");
  cmd->add_option("--set", opts.overrides, "extra key=value setting (repeatable)");
}

int die(int code) {
  std::fprintf(stderr, "error: %s\n", llmgp_last_error());
  return code;
}

// runs < 0 means "leave whatever the config said".
int apply_common(llmgp_config* cfg, const CommonOpts& opts, int runs) {
  int rc;
  if (!opts.config_path.empty() &&
      (rc = llmgp_config_load_file(cfg, opts.config_path.c_str())) != LLMGP_OK)
    return rc;
  if (opts.variant_opt->count() &&
      (rc = llmgp_config_set(cfg, "variant", opts.variant.c_str())) != LLMGP_OK)
    return rc;
  if (opts.seed_opt->count() &&
      (rc = llmgp_config_set(cfg, "seed", std::to_string(opts.seed).c_str())) != LLMGP_OK)
    return rc;
  if (opts.backend_opt->count() &&
      (rc = llmgp_config_set(cfg, "backend", opts.backend.c_str())) != LLMGP_OK)
    return rc;
  if (runs >= 0 &&
      (rc = llmgp_config_set(cfg, "runs", std::to_string(runs).c_str())) != LLMGP_OK)
    return rc;
  for (const auto& kv : opts.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return LLMGP_ERR_CONFIG;
    }
    if ((rc = llmgp_config_set(cfg, kv.substr(0, eq).c_str(),
                               kv.substr(eq + 1).c_str())) != LLMGP_OK)
      return rc;
  }
  return LLMGP_OK;
}

int execute(const CommonOpts& opts, int runs) {
  llmgp_config* cfg = llmgp_config_new();
  int rc = apply_common(cfg, opts, runs);
  if (rc != LLMGP_OK) {
    llmgp_config_free(cfg);
    return die(rc);
  }

  llmgp_result* result = nullptr;
  rc = llmgp_run(cfg, &result);
  llmgp_config_free(cfg);
  if (rc != LLMGP_OK) return die(rc);

  for (int i = 0; i < llmgp_result_run_count(result); ++i) {
    double train = 0.0;
    llmgp_result_best_fitness(result, i, "train", &train);
    std::printf("run %d: best=%s train_fitness=%.10g fe=%ld cost=%.6f stop=%s\n", i,
                llmgp_result_best_genotype(result, i), train,
                llmgp_result_fe_events(result, i), llmgp_result_cost_usd(result, i),
                llmgp_result_stop_reason(result, i));
  }

  if ((rc = llmgp_result_write_reports(result, opts.out_dir.c_str())) != LLMGP_OK ||
      (rc = llmgp_result_save(result, (opts.out_dir + "/results.json").c_str())) !=
          LLMGP_OK) {
    llmgp_result_free(result);
    return die(rc);
  }
  llmgp_result_free(result);
  std::printf("reports written to %s\n", opts.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genetic programming engine with LLM-backed evolutionary operators"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "execute a single run");
  add_common(run_cmd, run_opts);

  CommonOpts batch_opts;
  int batch_runs = 30;
  CLI::App* batch_cmd = app.add_subcommand("batch", "execute repeated runs, one budget");
  add_common(batch_cmd, batch_opts);
  CLI::Option* runs_opt = batch_cmd->add_option(
      "--runs", batch_runs, "number of runs (seeds seed..seed+runs-1; default from config)");

  std::string results_path;
  std::string report_out;
  CLI::App* report_cmd =
      app.add_subcommand("report", "regenerate report files from results.json");
  report_cmd->add_option("--results", results_path, "path to results.json")->required();
  report_cmd->add_option("--out-dir", report_out, "directory for report files")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return execute(run_opts, 1);
  if (batch_cmd->parsed()) return execute(batch_opts, runs_opt->count() ? batch_runs : -1);
  int rc = llmgp_report_from_file(results_path.c_str(), report_out.c_str());
  if (rc != LLMGP_OK) return die(rc);
  std::printf("reports written to %s\n", report_out.c_str());
  return 0;
}
