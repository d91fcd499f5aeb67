#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "llmgp/errors.hpp"
#include "llmgp/problem_env.hpp"
#include "llmgp/run_types.hpp"

namespace llmgp {

struct Individual {
  std::string genotype;
  std::optional<Expr> expr;          // absent when the genotype does not parse
  std::optional<double> fitness;     // absent until evaluated
  std::string origin;                // operator tag that produced it
  ErrorClass error = ErrorClass::None;

  static Individual from_expr(const Expr& e, std::string origin);
  // Parses the genotype; on failure the individual carries the raw text,
  // no tree, and the MalformedExpression flag.
  static Individual from_genotype(std::string text, const PrimitiveSet& prims,
                                  std::string origin);

  // Fitness as used for ranking and prompt rendering.
  double ranked_fitness() const { return fitness ? *fitness : kWorstFitness; }
};

struct Population {
  std::vector<Individual> members;
  int generation = 0;
};

// to_text/canonical form -> training fitness
using FitnessCache = std::unordered_map<std::string, double>;

struct RunState {
  int generation = 0;
  long fe_events = 0;
  double elapsed_s = 0.0;
  StopReason stop_reason = StopReason::generations_done;
};

enum class CacheKeyMode { raw, canonical };

// Assigns training-split MSE to every member. Each member counts as one
// fitness evaluation event whether or not the cache already held its
// value. Unparseable members get kWorstFitness and a MalformedExpression
// flag (also recorded against the "fitness" tag when a sink is given).
void evaluate_population(Population& pop, const ProblemEnv& env, FitnessCache& cache,
                         RunState& state, CacheKeyMode mode,
                         ErrorStats* errors = nullptr);

// Winner among the already-drawn candidate indices: lowest fitness, ties
// to the earlier population index.
size_t best_of(const Population& pop, const std::vector<size_t>& candidates);

// k uniform draws with replacement, then best_of.
size_t tournament_select(const Population& pop, int k, Rng& rng);

// Keeps the elite_size best of the old population plus the best
// (|old| - elite_size) offspring. Elites come first in rank order;
// chosen offspring keep their relative order.
Population generational_replace(const Population& old_pop, const Population& offspring,
                                int elite_size);

// Per-generation bookkeeping shared by all run loops.
GenerationStats population_stats(const Population& pop, int generation);
void track_best(std::optional<Individual>& best, const Population& pop);
// Fills the best-solution fields of a result, including test and holdout
// fitness of the chosen genotype.
void finalize_best(RunResult& result, const std::optional<Individual>& best,
                   const ProblemEnv& env);

// Baseline loops without any LLM: Variant::tutorial_gp runs the classic
// select/vary/replace cycle, Variant::random_search reinitializes the
// population every generation. Used by the harness and directly testable.
RunResult run_gp(const RunConfig& config, const ProblemEnv& env, Rng& rng);

}  // namespace llmgp
