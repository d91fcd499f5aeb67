#pragma once

#include <string>
#include <vector>

#include "llmgp/expr.hpp"
#include "llmgp/rng.hpp"

namespace llmgp {

// Fitness assigned when no real value is available (malformed genotype,
// unevaluated member in a prompt, failed external scoring). Large and
// finite so ranking and prompt rendering stay well defined.
inline constexpr double kWorstFitness = 1e12;

struct Exemplar {
  Point x;
  double y = 0.0;
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
  std::vector<int> holdout;
};

// Regression target x0^2 + x1^2 sampled on the 11x11 grid with
// x0, x1 in {-1.0, -0.8, ..., 1.0}. count == 121 returns the full grid;
// a smaller count returns a seeded subsample of it (grid order kept).
std::vector<Exemplar> generate_exemplars(int count, Rng& rng);

// Shuffles indices, reserves ~20% as holdout, then splits the remainder
// 70/30 into train/test. Sizes use round-to-nearest.
SplitIndices make_splits(int n, Rng& rng);

struct ProblemEnv {
  PrimitiveSet prims;
  std::vector<Exemplar> exemplars;
  SplitIndices splits;
  int n_shots = 2;

  std::vector<Point> points(const std::vector<int>& idx) const;
  std::vector<double> targets(const std::vector<int>& idx) const;
};

ProblemEnv make_env(int exemplar_count, int n_shots, Rng& rng);

double fitness_mse(const Expr& e, const std::vector<Exemplar>& exemplars,
                   const std::vector<int>& idx);
double fitness_mse(const Expr& e, const std::vector<Exemplar>& exemplars);

// simplify(parse(text)) rendered back to text. Throws ParseError on
// malformed input. Used as the equivalence key when matching LLM payloads
// against pool members and as the fitness-cache key for LLM variants.
std::string canonical_genotype(const std::string& text, const PrimitiveSet& prims);

}  // namespace llmgp
