#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "llmgp/backends.hpp"
#include "llmgp/client.hpp"
#include "llmgp/errors.hpp"

namespace llmgp {

enum class Variant { random_search, tutorial_gp, llm_direct, llm_gp, llm_gp_mu_xo };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

enum class BackendKind { none, mock_scripted, mock_generative, mock_faulty, remote_http };

const char* to_string(BackendKind k);
BackendKind backend_kind_from_string(const std::string& name);

struct BackendSpec {
  BackendKind kind = BackendKind::none;
  std::string replay_path;                        // mock_scripted
  BackendKind faulty_inner = BackendKind::mock_generative;
  FaultRates default_fault_rates;                 // mock_faulty
  std::map<std::string, FaultRates> fault_rates;  // per operator tag
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
};

enum class StopReason { generations_done, time_budget, money_budget };

const char* to_string(StopReason r);
StopReason stop_reason_from_string(const std::string& name);

struct RunConfig {
  Variant variant = Variant::tutorial_gp;
  std::uint64_t seed = 1;
  int runs = 30;
  int population_size = 10;
  int generations = 30;
  double p_crossover = 0.8;  // subtree crossover gate in the GP baseline
  double p_mutation = 0.2;   // per-child mutation gate
  int n_shots = 2;
  int max_depth = 5;
  int tournament_k = 2;
  int elite_size = 1;
  double budget_usd = 50.0;
  double max_runtime_s = 60000.0;
  int exemplars_gp = 121;
  int exemplars_llm = 10;

  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.8;
  int max_tokens = 512;
  int context_window = 4096;
  double price_prompt_per_1k = 0.0015;
  double price_completion_per_1k = 0.002;
  RetryPolicy retry;
  BackendSpec backend;
  std::string prompt_catalog_path;  // empty: built-in templates
};

struct GenerationStats {
  int generation = 0;
  double mean_size = 0.0;
  double duration_s = 0.0;
  double best_train = 0.0;
};

struct RunResult {
  std::string variant;
  std::uint64_t seed = 0;
  std::string best_genotype;
  double best_train_fitness = 0.0;
  double best_test_fitness = 0.0;
  double best_holdout_fitness = 0.0;
  std::vector<GenerationStats> generations;
  long fe_events = 0;
  double cost_usd = 0.0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  double duration_s = 0.0;
  StopReason stop_reason = StopReason::generations_done;
  ErrorStats errors;
  std::vector<PromptRecord> calls;
};

struct BatchResult {
  std::vector<RunResult> runs;
  double total_cost_usd = 0.0;
};

}  // namespace llmgp
