#include "llmgp/client.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace llmgp {

using nlohmann::json;

long estimate_tokens(const std::string& text) {
  return static_cast<long>(text.size());
}

CostLedger::CostLedger(double price_prompt_per_1k, double price_completion_per_1k,
                       double budget_usd)
    : price_prompt_(price_prompt_per_1k),
      price_completion_(price_completion_per_1k),
      budget_(budget_usd) {}

double CostLedger::cost_of(long prompt_tokens, long completion_tokens) const {
  return (static_cast<double>(prompt_tokens) * price_prompt_ +
          static_cast<double>(completion_tokens) * price_completion_) /
         1000.0;
}

std::optional<CostLedger::Reservation> CostLedger::try_reserve(double estimated_cost) {
  std::lock_guard lock(mu_);
  if (accumulated_ + reserved_ >= budget_) return std::nullopt;
  reserved_ += estimated_cost;
  return Reservation{estimated_cost, true};
}

void CostLedger::commit(Reservation& r, long prompt_tokens, long completion_tokens) {
  std::lock_guard lock(mu_);
  if (r.active) {
    reserved_ -= r.amount;
    r.active = false;
  }
  accumulated_ += cost_of(prompt_tokens, completion_tokens);
  prompt_tokens_ += prompt_tokens;
  completion_tokens_ += completion_tokens;
}

void CostLedger::release(Reservation& r) {
  std::lock_guard lock(mu_);
  if (r.active) {
    reserved_ -= r.amount;
    r.active = false;
  }
}

bool CostLedger::exhausted() const {
  std::lock_guard lock(mu_);
  // Mirrors the try_reserve refusal condition so callers polling this
  // flag agree with the issuance gate even while calls are in flight.
  return accumulated_ + reserved_ >= budget_;
}

double CostLedger::accumulated() const {
  std::lock_guard lock(mu_);
  return accumulated_;
}

long CostLedger::total_prompt_tokens() const {
  std::lock_guard lock(mu_);
  return prompt_tokens_;
}

long CostLedger::total_completion_tokens() const {
  std::lock_guard lock(mu_);
  return completion_tokens_;
}

LlmClient::LlmClient(Backend& backend, CostLedger& ledger, ClientConfig config,
                     std::uint64_t seed)
    : backend_(backend),
      ledger_(ledger),
      config_(std::move(config)),
      sleeper_([](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
      }),
      jitter_rng_(derive_seed(seed, 0x6a69747465ULL)) {}

void LlmClient::set_sleeper(Sleeper s) { sleeper_ = std::move(s); }
void LlmClient::set_error_sink(ErrorStats* sink) { errors_ = sink; }

LlmClient::Completion LlmClient::complete(const std::string& prompt,
                                          const std::string& operator_tag,
                                          int generation) {
  std::lock_guard lock(mu_);
  Completion out;
  out.record.prompt = prompt;
  out.record.operator_tag = operator_tag;
  out.record.generation = generation;

  long prompt_estimate = estimate_tokens(prompt);
  if (prompt_estimate + config_.max_tokens > config_.context_window) {
    out.error = ErrorClass::ContextOverflow;
    out.record.n_prompt_tokens = prompt_estimate;
    out.record.attempt = 0;
    if (errors_) errors_->record(operator_tag, out.error);
    log_.push_back(out.record);
    return out;
  }

  auto reservation =
      ledger_.try_reserve(ledger_.cost_of(prompt_estimate, config_.max_tokens));
  if (!reservation) {
    out.error = ErrorClass::BudgetExceeded;
    if (errors_) errors_->record(operator_tag, out.error);
    return out;  // nothing issued, nothing logged
  }

  BackendRequest req;
  req.prompt = prompt;
  req.temperature = config_.temperature;
  req.model_id = config_.model_id;
  req.max_tokens = config_.max_tokens;
  req.operator_tag = operator_tag;
  req.generation = generation;

  const RetryPolicy& retry = config_.retry;
  for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
    req.call_index = call_index_++;
    BackendResponse resp = backend_.complete(req);
    if (!resp.transient_error) {
      ledger_.commit(*reservation, resp.prompt_tokens, resp.completion_tokens);
      out.record.content = resp.content;
      out.record.n_prompt_tokens = resp.prompt_tokens;
      out.record.n_completion_tokens = resp.completion_tokens;
      out.record.response_time = resp.response_time;
      out.record.attempt = attempt;
      virtual_elapsed_ += resp.response_time;
      log_.push_back(out.record);
      return out;
    }
    if (attempt < retry.max_attempts) {
      double delay = retry.base_delay_s *
                     std::pow(retry.multiplier, static_cast<double>(attempt - 1));
      delay *= 1.0 + retry.jitter * rand_range(jitter_rng_, -1.0, 1.0);
      virtual_elapsed_ += delay;
      sleeper_(delay);
    }
  }

  ledger_.release(*reservation);
  out.error = ErrorClass::ServiceError;
  out.record.attempt = retry.max_attempts;
  if (errors_) errors_->record(operator_tag, out.error);
  log_.push_back(out.record);
  return out;
}

json record_to_json(const PromptRecord& r) {
  return json{{"prompt", r.prompt},
              {"content", r.content},
              {"n_prompt_tokens", r.n_prompt_tokens},
              {"n_completion_tokens", r.n_completion_tokens},
              {"response_time", r.response_time},
              {"operator_tag", r.operator_tag},
              {"generation", r.generation},
              {"attempt", r.attempt}};
}

PromptRecord record_from_json(const json& j) {
  PromptRecord r;
  r.prompt = j.at("prompt").get<std::string>();
  r.content = j.at("content").get<std::string>();
  r.n_prompt_tokens = j.at("n_prompt_tokens").get<long>();
  r.n_completion_tokens = j.at("n_completion_tokens").get<long>();
  r.response_time = j.at("response_time").get<double>();
  r.operator_tag = j.at("operator_tag").get<std::string>();
  r.generation = j.at("generation").get<int>();
  r.attempt = j.at("attempt").get<int>();
  return r;
}

void append_call_log(std::ostream& out, const PromptRecord& record) {
  out << record_to_json(record).dump() << "\n";
}

void write_call_log(const std::string& path, const std::vector<PromptRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open call log for writing: " + path);
  for (const auto& r : records) append_call_log(out, r);
}

std::vector<PromptRecord> replay_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ReplayError(0, "cannot open call log: " + path);
  std::vector<PromptRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ReplayError(line_no, "call log line " + std::to_string(line_no) +
                                     " is not valid JSON");
    try {
      out.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw ReplayError(line_no, "call log line " + std::to_string(line_no) + ": " +
                                     e.what());
    }
  }
  return out;
}

}  // namespace llmgp
