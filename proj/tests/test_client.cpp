#include "llmgp/client.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "llmgp/backends.hpp"

namespace llmgp {
namespace {

// Succeeds after a configurable number of transient failures; counts how
// often it was hit.
class FlakyBackend : public Backend {
 public:
  explicit FlakyBackend(int failures, std::string content = "{\"ok\": true}")
      : failures_(failures), content_(std::move(content)) {}

  BackendResponse complete(const BackendRequest&) override {
    ++calls;
    BackendResponse resp;
    if (calls <= failures_) {
      resp.transient_error = true;
      return resp;
    }
    resp.content = content_;
    resp.prompt_tokens = 100;
    resp.completion_tokens = 20;
    resp.response_time = 0.5;
    return resp;
  }
  bool deterministic() const override { return true; }

  int calls = 0;

 private:
  int failures_;
  std::string content_;
};

ClientConfig small_config() {
  ClientConfig cc;
  cc.max_tokens = 64;
  cc.context_window = 4096;
  return cc;
}

TEST(TokensTest, EstimateIsByteLength) {
  EXPECT_EQ(estimate_tokens(""), 0);
  EXPECT_EQ(estimate_tokens("abc"), 3);
  EXPECT_EQ(estimate_tokens("a b"), 3);
  EXPECT_EQ(estimate_tokens("\xc3\xa9"), 2);  // multibyte counts per byte
}

TEST(LedgerTest, CostFormula) {
  CostLedger ledger(0.0015, 0.002, 50.0);
  EXPECT_DOUBLE_EQ(ledger.cost_of(1000, 1000), 0.0035);
  EXPECT_DOUBLE_EQ(ledger.cost_of(100, 400), (100 * 0.0015 + 400 * 0.002) / 1000.0);
  EXPECT_DOUBLE_EQ(ledger.cost_of(100, 400), 0.00095);
  EXPECT_DOUBLE_EQ(ledger.cost_of(0, 0), 0.0);
}

TEST(LedgerTest, SyntheticLogMatchesClosedForm) {
  CostLedger ledger(0.0015, 0.002, 1e9);
  double closed_form = 0.0;
  double accumulated_expected = 0.0;
  for (int i = 0; i < 1000; ++i) {
    long pt = 17 + (i * 37) % 900;
    long ct = 5 + (i * 13) % 400;
    closed_form += (pt * 0.0015 + ct * 0.002) / 1000.0;
    auto r = ledger.try_reserve(ledger.cost_of(pt, ct));
    ASSERT_TRUE(r.has_value());
    ledger.commit(*r, pt, ct);
    accumulated_expected += ledger.cost_of(pt, ct);
  }
  EXPECT_NEAR(ledger.accumulated(), closed_form,
              1e-12 * std::max(1.0, std::fabs(closed_form)));
  EXPECT_DOUBLE_EQ(ledger.accumulated(), accumulated_expected);
}

TEST(LedgerTest, ReserveCommitReleaseAndExhaustion) {
  CostLedger ledger(1.0, 1.0, 0.001);  // 1 USD per 1k tokens both ways

  // Issuance halts once accumulated + in-flight reaches the budget; the
  // call that crosses the line is still allowed, so overshoot is bounded
  // by one call's cost.
  EXPECT_FALSE(ledger.exhausted());
  auto r1 = ledger.try_reserve(0.001);  // fills the budget while in flight
  ASSERT_TRUE(r1.has_value());
  EXPECT_TRUE(ledger.exhausted());
  EXPECT_FALSE(ledger.try_reserve(1e-9).has_value())
      << "in-flight reservation must count against the budget";

  ledger.release(*r1);
  EXPECT_FALSE(ledger.exhausted());
  auto r2 = ledger.try_reserve(0.001);
  ASSERT_TRUE(r2.has_value());
  ledger.commit(*r2, 0, 0);  // actual usage may be below the reservation
  EXPECT_DOUBLE_EQ(ledger.accumulated(), 0.0);
  EXPECT_FALSE(ledger.exhausted());

  auto r3 = ledger.try_reserve(0.0005);
  ASSERT_TRUE(r3.has_value());
  ledger.commit(*r3, 1, 0);  // 0.001 accumulated
  EXPECT_DOUBLE_EQ(ledger.accumulated(), 0.001);
  EXPECT_TRUE(ledger.exhausted());
  EXPECT_FALSE(ledger.try_reserve(1e-9).has_value());
  EXPECT_EQ(ledger.total_prompt_tokens(), 1);
  EXPECT_EQ(ledger.total_completion_tokens(), 0);
}

TEST(LedgerTest, ZeroBudgetIsExhaustedFromTheStart) {
  CostLedger ledger(0.0015, 0.002, 0.0);
  EXPECT_TRUE(ledger.exhausted());
  EXPECT_FALSE(ledger.try_reserve(0.0).has_value());
}

TEST(ClientTest, SuccessLogsOneRecordAndCommitsActualUsage) {
  FlakyBackend backend(0);
  CostLedger ledger(0.0015, 0.002, 50.0);
  LlmClient client(backend, ledger, small_config(), 1);
  client.set_sleeper([](double) {});

  auto c = client.complete("hello prompt", "mutation", 4);
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(backend.calls, 1);
  EXPECT_EQ(c.record.content, "{\"ok\": true}");
  EXPECT_EQ(c.record.n_prompt_tokens, 100);
  EXPECT_EQ(c.record.n_completion_tokens, 20);
  EXPECT_EQ(c.record.operator_tag, "mutation");
  EXPECT_EQ(c.record.generation, 4);
  EXPECT_EQ(c.record.attempt, 1);
  EXPECT_DOUBLE_EQ(c.record.response_time, 0.5);
  ASSERT_EQ(client.call_log().size(), 1u);
  EXPECT_DOUBLE_EQ(ledger.accumulated(), ledger.cost_of(100, 20));
  EXPECT_DOUBLE_EQ(client.virtual_elapsed(), 0.5);
}

TEST(ClientTest, RetriesThenSucceeds) {
  FlakyBackend backend(2);
  CostLedger ledger(0.0015, 0.002, 50.0);
  LlmClient client(backend, ledger, small_config(), 1);
  std::vector<double> delays;
  client.set_sleeper([&](double s) { delays.push_back(s); });

  auto c = client.complete("p", "init", 1);
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(backend.calls, 3);
  EXPECT_EQ(c.record.attempt, 3);
  ASSERT_EQ(delays.size(), 2u);
  EXPECT_GE(delays[0], 0.8);
  EXPECT_LE(delays[0], 1.2);
  EXPECT_GE(delays[1], 1.6);
  EXPECT_LE(delays[1], 2.4);
  EXPECT_EQ(client.call_log().size(), 1u) << "one record per logical call";
  EXPECT_DOUBLE_EQ(client.virtual_elapsed(), delays[0] + delays[1] + 0.5);
}

TEST(ClientTest, ExhaustedRetriesYieldServiceError) {
  FlakyBackend backend(1000);
  CostLedger ledger(0.0015, 0.002, 50.0);
  ErrorStats errors;
  LlmClient client(backend, ledger, small_config(), 1);
  client.set_error_sink(&errors);
  std::vector<double> delays;
  client.set_sleeper([&](double s) { delays.push_back(s); });

  auto c = client.complete("p", "crossover", 2);
  EXPECT_EQ(c.error, ErrorClass::ServiceError);
  EXPECT_EQ(backend.calls, 6) << "default policy tries 6 times";
  ASSERT_EQ(delays.size(), 5u) << "no sleep after the final attempt";
  double expected = 1.0;
  for (double d : delays) {
    EXPECT_GE(d, expected * 0.8);
    EXPECT_LE(d, expected * 1.2);
    expected *= 2.0;
  }
  ASSERT_EQ(client.call_log().size(), 1u);
  EXPECT_EQ(client.call_log()[0].attempt, 6);
  EXPECT_TRUE(client.call_log()[0].content.empty());
  EXPECT_EQ(errors.counts.at("crossover").at(ErrorClass::ServiceError), 1);
  EXPECT_DOUBLE_EQ(ledger.accumulated(), 0.0) << "failed call must not bill";
}

TEST(ClientTest, JitterIsSeedStable) {
  auto run_delays = [](std::uint64_t seed) {
    FlakyBackend backend(1000);
    CostLedger ledger(0.0015, 0.002, 50.0);
    LlmClient client(backend, ledger, small_config(), seed);
    std::vector<double> delays;
    client.set_sleeper([&](double s) { delays.push_back(s); });
    client.complete("p", "init", 1);
    return delays;
  };
  EXPECT_EQ(run_delays(42), run_delays(42));
  EXPECT_NE(run_delays(42), run_delays(43));
}

TEST(ClientTest, ContextOverflowIsRefusedUpFront) {
  FlakyBackend backend(0);
  CostLedger ledger(0.0015, 0.002, 50.0);
  ErrorStats errors;
  ClientConfig cc;
  cc.max_tokens = 512;
  cc.context_window = 600;
  LlmClient client(backend, ledger, cc, 1);
  client.set_error_sink(&errors);

  std::string prompt(100, 'a');  // 100 byte-tokens + 512 > 600
  auto c = client.complete(prompt, "selection", 3);
  EXPECT_EQ(c.error, ErrorClass::ContextOverflow);
  EXPECT_EQ(backend.calls, 0) << "overflow must never reach the backend";
  ASSERT_EQ(client.call_log().size(), 1u) << "refusal is still logged";
  EXPECT_EQ(client.call_log()[0].attempt, 0);
  EXPECT_EQ(client.call_log()[0].n_prompt_tokens, 100);
  EXPECT_TRUE(client.call_log()[0].content.empty());
  EXPECT_EQ(errors.counts.at("selection").at(ErrorClass::ContextOverflow), 1);
  EXPECT_DOUBLE_EQ(ledger.accumulated(), 0.0);

  std::string fits(80, 'a');  // 80 + 512 <= 600
  EXPECT_TRUE(client.complete(fits, "selection", 3).ok());
}

TEST(ClientTest, BudgetRefusalIssuesNothingAndLogsNothing) {
  FlakyBackend backend(0);
  CostLedger ledger(0.0015, 0.002, 0.0);
  ErrorStats errors;
  LlmClient client(backend, ledger, small_config(), 1);
  client.set_error_sink(&errors);

  auto c = client.complete("p", "init", 1);
  EXPECT_EQ(c.error, ErrorClass::BudgetExceeded);
  EXPECT_EQ(backend.calls, 0);
  EXPECT_TRUE(client.call_log().empty());
  EXPECT_EQ(errors.counts.at("init").at(ErrorClass::BudgetExceeded), 1);
}

TEST(ClientTest, CrossingCallCompletesThenIssuanceHalts) {
  FlakyBackend backend(0);
  CostLedger tight(0.0015, 0.002, 0.00005);  // below one call's real cost
  LlmClient client(backend, tight, small_config(), 1);
  client.set_sleeper([](double) {});

  auto first = client.complete("0123456789", "init", 1);
  EXPECT_TRUE(first.ok()) << "budget not yet met, the crossing call may run";
  EXPECT_GT(tight.accumulated(), tight.budget());
  EXPECT_TRUE(tight.exhausted());

  auto second = client.complete("0123456789", "init", 1);
  EXPECT_EQ(second.error, ErrorClass::BudgetExceeded);
  EXPECT_EQ(backend.calls, 1);
  EXPECT_EQ(client.call_log().size(), 1u);
}

TEST(CallLogTest, JsonlRoundTrip) {
  std::vector<PromptRecord> records;
  PromptRecord a;
  a.prompt = "line one\nline two with \"quotes\" and unicode \xc3\xa9";
  a.content = "{\"expression\": \"x0\"}";
  a.n_prompt_tokens = 42;
  a.n_completion_tokens = 7;
  a.response_time = 1.25;
  a.operator_tag = "init";
  a.generation = 3;
  a.attempt = 2;
  records.push_back(a);
  PromptRecord b;
  b.operator_tag = "sort";
  records.push_back(b);

  std::string path = testing::TempDir() + "calls_roundtrip.jsonl";
  write_call_log(path, records);
  auto back = replay_log(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].prompt, a.prompt);
  EXPECT_EQ(back[0].content, a.content);
  EXPECT_EQ(back[0].n_prompt_tokens, 42);
  EXPECT_EQ(back[0].n_completion_tokens, 7);
  EXPECT_DOUBLE_EQ(back[0].response_time, 1.25);
  EXPECT_EQ(back[0].operator_tag, "init");
  EXPECT_EQ(back[0].generation, 3);
  EXPECT_EQ(back[0].attempt, 2);
  EXPECT_EQ(back[1].operator_tag, "sort");
  std::remove(path.c_str());
}

TEST(CallLogTest, RecordJsonHasExactlyTheEightFields) {
  PromptRecord r;
  auto j = record_to_json(r);
  EXPECT_EQ(j.size(), 8u);
  for (const char* key : {"prompt", "content", "n_prompt_tokens", "n_completion_tokens",
                          "response_time", "operator_tag", "generation", "attempt"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(CallLogTest, ReplayErrorsCarryLineNumbers) {
  std::string path = testing::TempDir() + "calls_bad.jsonl";
  {
    std::ofstream out(path);
    out << record_to_json(PromptRecord{}).dump() << "\n";
    out << "this is not json\n";
  }
  try {
    replay_log(path);
    FAIL() << "expected ReplayError";
  } catch (const ReplayError& e) {
    EXPECT_EQ(e.line(), 2);
  }

  {
    std::ofstream out(path);
    out << "{\"prompt\": \"p\"}\n";  // missing keys
  }
  try {
    replay_log(path);
    FAIL() << "expected ReplayError";
  } catch (const ReplayError& e) {
    EXPECT_EQ(e.line(), 1);
  }

  std::remove(path.c_str());
  try {
    replay_log(path);
    FAIL() << "expected ReplayError";
  } catch (const ReplayError& e) {
    EXPECT_EQ(e.line(), 0) << "unopenable file reports line 0";
  }
}

TEST(CallLogTest, EmptyLinesAreSkipped) {
  std::string path = testing::TempDir() + "calls_gaps.jsonl";
  {
    std::ofstream out(path);
    out << record_to_json(PromptRecord{}).dump() << "\n\n";
    out << record_to_json(PromptRecord{}).dump() << "\n";
  }
  EXPECT_EQ(replay_log(path).size(), 2u);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace llmgp
