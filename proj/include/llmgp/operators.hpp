#pragma once

#include <string>
#include <utility>
#include <vector>

#include "llmgp/client.hpp"
#include "llmgp/ea.hpp"
#include "llmgp/prompts.hpp"

namespace llmgp {

// One entry per operator call, fallback or not.
struct OperatorOutcome {
  std::string op;
  bool used_fallback = false;
  ErrorClass error = ErrorClass::None;
};

// Evolutionary operators that delegate to a language model. Every call
// follows the same three steps: formulate the prompt, interface with the
// client, check the response. Any failure along the way degrades to the
// operator's deterministic fallback; no call ever throws on bad model
// output.
//
// Fallbacks: init retries the prompt (3 tries), then draws a random tree.
// Mutation returns the parent unchanged. Crossover returns both parents
// unless the payload yields two valid children. Selection falls back to
// uniform random choice with replacement, replacement to truncation by
// fitness, best-of-population to the numeric best. External evaluation
// falls back to no outputs, external scoring to the worst fitness.
class LlmOperators {
 public:
  LlmOperators(const ProblemEnv& env, const PromptFormulator& formulator,
               LlmClient& client, ErrorStats& errors, Rng& rng, int max_depth);

  Individual initialize_one(int generation, const std::string& tag = "init");
  Population initialize(int n, int generation, const std::string& tag = "init");

  Individual mutate(const Individual& parent, const std::vector<std::string>& samples,
                    int generation);

  std::pair<Individual, Individual> crossover(const Individual& parent_a,
                                              const Individual& parent_b,
                                              const std::vector<std::string>& samples,
                                              int generation);

  // k choices with replacement; returned values index into pop.
  std::vector<size_t> select(const Population& pop, int k, int generation);

  // Picks n members of the pool (payload order). Pool members can be
  // chosen at most once each, except genotypes the pool itself repeats.
  Population replace(const Population& pool, int n, int generation);

  // Index of the member the model ranks first.
  size_t best(const Population& pop, int generation);

  // External evaluation and scoring, kept behind prompts as well.
  std::vector<double> evaluate_outputs(const std::string& genotype,
                                       const std::vector<Point>& points, int generation);
  double fitness_from_outputs(const std::string& genotype,
                              const std::vector<double>& outputs,
                              const std::vector<double>& targets, int generation);

  const std::vector<OperatorOutcome>& outcomes() const { return outcomes_; }
  static constexpr int kInitRetries = 3;

 private:
  void note(const std::string& op, bool fallback, ErrorClass error);
  // simplify + re-render; nullopt when text does not parse.
  std::optional<Individual> individual_from_payload(const std::string& text,
                                                    const std::string& origin);
  std::vector<std::pair<std::string, double>> rendered(const Population& pop) const;
  std::optional<size_t> match_member(const Population& pop, const std::string& text,
                                     const std::vector<bool>* used) const;

  const ProblemEnv& env_;
  const PromptFormulator& formulator_;
  LlmClient& client_;
  ErrorStats& errors_;
  Rng& rng_;
  int max_depth_;
  std::vector<OperatorOutcome> outcomes_;
};

}  // namespace llmgp
