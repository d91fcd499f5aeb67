#pragma once

#include <memory>
#include <string>

#include "llmgp/config.hpp"
#include "llmgp/run_types.hpp"

namespace llmgp {

// Builds the backend named by the spec. `run_seed` keys the deterministic
// mocks; the generative and faulty mocks derive independent streams from it.
// Throws ConfigError for BackendKind::none (callers must not reach a client
// that has nowhere to send prompts) and for impossible nestings.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const RunConfig& config,
                                      std::uint64_t run_seed);

// Executes one run of config.variant with config.seed. LLM variants draw
// from `ledger`, which may be shared across runs so a batch respects one
// money budget. Deterministic backends report simulated durations (summed
// response times plus backoff delays); the GP baselines and remote_http
// report wall-clock time.
RunResult run_single(const RunConfig& config, CostLedger& ledger);

// config.runs sequential runs with seeds config.seed + i and a shared
// ledger. Stops launching new runs once the ledger is exhausted.
BatchResult run_batch(const RunConfig& config);

// Writes summary.csv, generations.csv, llm_calls.jsonl and errors.csv
// into out_dir (created if missing).
void write_reports(const BatchResult& batch, const std::string& out_dir);

// Full machine-readable record of a batch (schema "llmgp.results.v1"),
// sufficient to regenerate every report file later.
void write_results_json(const BatchResult& batch, const RunConfig& config,
                        const std::string& path);
BatchResult read_results_json(const std::string& path);

// `report` subcommand body: load results.json, emit the report files.
void write_reports_from_file(const std::string& results_path,
                             const std::string& out_dir);

}  // namespace llmgp
