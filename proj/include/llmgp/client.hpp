#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmgp/errors.hpp"
#include "llmgp/rng.hpp"

namespace llmgp {

struct ChatRequest {
  std::string prompt;
  double temperature = 0.8;
  std::string model_id = "gpt-3.5-turbo";
  int max_tokens = 512;
};

// One logged completion attempt cycle. A successful call stores the
// winning attempt's data; a failed call stores empty content, zero token
// counts, and the number of attempts consumed (0 when the request was
// never issued, as with a context overflow).
struct PromptRecord {
  std::string prompt;
  std::string content;
  long n_prompt_tokens = 0;
  long n_completion_tokens = 0;
  double response_time = 0.0;  // seconds; > 0 for completed calls
  std::string operator_tag;
  int generation = 0;
  int attempt = 0;
};

// Deterministic upper bound on the token count of `text`. Byte length is
// used: every BPE token spans at least one byte, so the estimate can
// never undercount, and it is trivially monotone and additive.
long estimate_tokens(const std::string& text);

// Accumulated spend in USD. Thread safe; check-and-reserve is atomic so
// concurrent callers cannot race past the budget.
class CostLedger {
 public:
  CostLedger(double price_prompt_per_1k, double price_completion_per_1k,
             double budget_usd);

  double cost_of(long prompt_tokens, long completion_tokens) const;

  struct Reservation {
    double amount = 0.0;
    bool active = false;
  };

  // nullopt once accumulated + in-flight reservations reach the budget.
  std::optional<Reservation> try_reserve(double estimated_cost);
  void commit(Reservation& r, long prompt_tokens, long completion_tokens);
  void release(Reservation& r);

  bool exhausted() const;
  double accumulated() const;
  double budget() const { return budget_; }
  long total_prompt_tokens() const;
  long total_completion_tokens() const;

 private:
  double price_prompt_;
  double price_completion_;
  double budget_;
  mutable std::mutex mu_;
  double accumulated_ = 0.0;
  double reserved_ = 0.0;
  long prompt_tokens_ = 0;
  long completion_tokens_ = 0;
};

struct RetryPolicy {
  double base_delay_s = 1.0;
  double multiplier = 2.0;
  int max_attempts = 6;
  double jitter = 0.2;  // +/- fraction applied to each delay
};

struct ClientConfig {
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.8;
  int max_tokens = 512;
  int context_window = 4096;
  RetryPolicy retry;
};

struct BackendRequest {
  std::string prompt;
  double temperature = 0.8;
  std::string model_id;
  int max_tokens = 512;
  std::string operator_tag;
  int generation = 0;
  std::uint64_t call_index = 0;
};

struct BackendResponse {
  bool transient_error = false;  // triggers retry with backoff
  std::string content;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  double response_time = 0.0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse complete(const BackendRequest& req) = 0;
  // Deterministic backends let the harness report simulated time, which
  // keeps report files byte-stable across executions.
  virtual bool deterministic() const = 0;
};

// Issues prompts against a backend with budget enforcement, context
// window pre-flight, retry with exponential backoff, and a call log.
// Thread safe. Every invocation of complete() appends one PromptRecord,
// except budget refusals, which issue nothing and log nothing.
class LlmClient {
 public:
  using Sleeper = std::function<void(double /*seconds*/)>;

  LlmClient(Backend& backend, CostLedger& ledger, ClientConfig config,
            std::uint64_t seed);

  void set_sleeper(Sleeper s);
  void set_error_sink(ErrorStats* sink);

  struct Completion {
    PromptRecord record;
    ErrorClass error = ErrorClass::None;
    bool ok() const { return error == ErrorClass::None; }
  };

  Completion complete(const std::string& prompt, const std::string& operator_tag,
                      int generation);

  const std::vector<PromptRecord>& call_log() const { return log_; }
  // Simulated elapsed seconds: response times plus backoff delays.
  double virtual_elapsed() const { return virtual_elapsed_; }
  const ClientConfig& config() const { return config_; }

 private:
  Backend& backend_;
  CostLedger& ledger_;
  ClientConfig config_;
  Sleeper sleeper_;
  ErrorStats* errors_ = nullptr;
  mutable std::mutex mu_;
  Rng jitter_rng_;
  std::uint64_t call_index_ = 0;
  double virtual_elapsed_ = 0.0;
  std::vector<PromptRecord> log_;
};

// ---------------------------------------------------------------------------
// JSON-lines call log persistence.

class ReplayError : public std::runtime_error {
 public:
  ReplayError(int line, const std::string& what)
      : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

nlohmann::json record_to_json(const PromptRecord& record);
PromptRecord record_from_json(const nlohmann::json& j);

void append_call_log(std::ostream& out, const PromptRecord& record);
void write_call_log(const std::string& path, const std::vector<PromptRecord>& records);
// Throws ReplayError carrying the 1-based line number on malformed input.
std::vector<PromptRecord> replay_log(const std::string& path);

}  // namespace llmgp
