#include "llmgp/problem_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace llmgp {

std::vector<Exemplar> generate_exemplars(int count, Rng& rng) {
  std::vector<Exemplar> grid;
  grid.reserve(121);
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      Point p{(i - 5) / 5.0, (j - 5) / 5.0};
      grid.push_back({p, p.x0 * p.x0 + p.x1 * p.x1});
    }
  }
  if (count >= static_cast<int>(grid.size())) return grid;
  if (count < 1) throw std::invalid_argument("exemplar count must be >= 1");

  // Partial Fisher-Yates over the index range, then restore grid order.
  std::vector<int> idx(grid.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    size_t j = i + rand_below(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<Exemplar> out;
  out.reserve(count);
  for (int k : idx) out.push_back(grid[k]);
  return out;
}

SplitIndices make_splits(int n, Rng& rng) {
  if (n < 3) throw std::invalid_argument("need at least 3 exemplars to split");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < n - 1; ++i) {
    size_t j = i + rand_below(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  int n_holdout = static_cast<int>(std::lround(0.2 * n));
  int remainder = n - n_holdout;
  int n_train = static_cast<int>(std::lround(0.7 * remainder));

  SplitIndices s;
  s.holdout.assign(idx.begin(), idx.begin() + n_holdout);
  s.train.assign(idx.begin() + n_holdout, idx.begin() + n_holdout + n_train);
  s.test.assign(idx.begin() + n_holdout + n_train, idx.end());
  std::sort(s.holdout.begin(), s.holdout.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<Point> ProblemEnv::points(const std::vector<int>& idx) const {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(exemplars[i].x);
  return out;
}

std::vector<double> ProblemEnv::targets(const std::vector<int>& idx) const {
  std::vector<double> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(exemplars[i].y);
  return out;
}

ProblemEnv make_env(int exemplar_count, int n_shots, Rng& rng) {
  ProblemEnv env;
  env.prims = PrimitiveSet::demo();
  env.exemplars = generate_exemplars(exemplar_count, rng);
  env.splits = make_splits(static_cast<int>(env.exemplars.size()), rng);
  env.n_shots = n_shots;
  return env;
}

double fitness_mse(const Expr& e, const std::vector<Exemplar>& exemplars,
                   const std::vector<int>& idx) {
  if (idx.empty()) throw std::invalid_argument("empty index set");
  double sum = 0.0;
  for (int i : idx) {
    double d = evaluate(e, exemplars[i].x) - exemplars[i].y;
    sum += d * d;
  }
  return sum / static_cast<double>(idx.size());
}

double fitness_mse(const Expr& e, const std::vector<Exemplar>& exemplars) {
  std::vector<int> idx(exemplars.size());
  std::iota(idx.begin(), idx.end(), 0);
  return fitness_mse(e, exemplars, idx);
}

std::string canonical_genotype(const std::string& text, const PrimitiveSet& prims) {
  return to_text(simplify(parse(text, prims)));
}

}  // namespace llmgp
