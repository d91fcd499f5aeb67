#pragma once

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "llmgp/client.hpp"
#include "llmgp/expr.hpp"

namespace llmgp {

// Replays canned content. Responses queued for a specific prompt are
// served first (FIFO per prompt); otherwise the general queue is drained.
// An exhausted backend answers with empty content, which downstream
// formatting classifies as a decode failure. Entries loaded from a call
// log replay the recorded token counts and response time, so a replayed
// run reproduces the original's reports; manually enqueued content gets
// synthesized values.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(const std::vector<PromptRecord>& replay);
  static ScriptedBackend from_file(const std::string& path);

  void enqueue(std::string content);
  void enqueue_for(std::string prompt, std::string content);

  BackendResponse complete(const BackendRequest& req) override;
  bool deterministic() const override { return true; }

 private:
  struct Entry {
    std::string content;
    bool recorded = false;  // replay token counts and latency verbatim
    long prompt_tokens = 0;
    long completion_tokens = 0;
    double response_time = 0.0;
  };
  std::map<std::string, std::deque<Entry>> by_prompt_;
  std::deque<Entry> queue_;
};

// Parses the incoming prompt, recognizes which operator family produced
// it, and answers with a well-formed response computed by the matching
// structural operation (random tree, subtree mutation, subtree crossover,
// rank-based choice, arithmetic evaluation). Content is a pure function
// of (prompt, seed, call index).
class GenerativeBackend : public Backend {
 public:
  GenerativeBackend(std::uint64_t seed, PrimitiveSet prims, int max_depth = 5);

  BackendResponse complete(const BackendRequest& req) override;
  bool deterministic() const override { return true; }

 private:
  std::uint64_t seed_;
  PrimitiveSet prims_;
  int max_depth_;
};

struct FaultRates {
  double malformed_json = 0.0;
  double missing_key = 0.0;
  double truncated = 0.0;
  double service_error = 0.0;
};

// Wraps another backend and injects faults at configured per-operator
// rates. Fault draws are a pure function of (seed, call index).
class FaultyBackend : public Backend {
 public:
  FaultyBackend(std::unique_ptr<Backend> inner, std::uint64_t seed);

  void set_default_rates(const FaultRates& rates);
  void set_rates(const std::string& operator_tag, const FaultRates& rates);

  BackendResponse complete(const BackendRequest& req) override;
  bool deterministic() const override { return inner_->deterministic(); }

 private:
  const FaultRates& rates_for(const std::string& operator_tag) const;

  std::unique_ptr<Backend> inner_;
  std::uint64_t seed_;
  FaultRates default_rates_;
  std::map<std::string, FaultRates> per_operator_;
};

struct HttpBackendConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key;  // typically from the LLMGP_API_KEY environment variable
  int timeout_s = 120;
};

// OpenAI-style chat completion transport. Network, HTTP 429 and 5xx
// failures surface as transient errors so the client retries them.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  BackendResponse complete(const BackendRequest& req) override;
  bool deterministic() const override { return false; }

 private:
  HttpBackendConfig config_;
};

}  // namespace llmgp
