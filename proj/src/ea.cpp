#include "llmgp/ea.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace llmgp {

Individual Individual::from_expr(const Expr& e, std::string origin) {
  Individual ind;
  ind.genotype = to_text(e);
  ind.expr = e;
  ind.origin = std::move(origin);
  return ind;
}

Individual Individual::from_genotype(std::string text, const PrimitiveSet& prims,
                                     std::string origin) {
  Individual ind;
  ind.genotype = std::move(text);
  ind.origin = std::move(origin);
  ind.expr = try_parse(ind.genotype, prims);
  if (!ind.expr) ind.error = ErrorClass::MalformedExpression;
  return ind;
}

void evaluate_population(Population& pop, const ProblemEnv& env, FitnessCache& cache,
                         RunState& state, CacheKeyMode mode, ErrorStats* errors) {
  for (auto& member : pop.members) {
    ++state.fe_events;
    if (!member.expr) {
      member.fitness = kWorstFitness;
      member.error = ErrorClass::MalformedExpression;
      if (errors) errors->record("fitness", ErrorClass::MalformedExpression);
      continue;
    }
    std::string key = mode == CacheKeyMode::canonical
                          ? to_text(simplify(*member.expr))
                          : to_text(*member.expr);
    auto it = cache.find(key);
    if (it == cache.end()) {
      double f = fitness_mse(*member.expr, env.exemplars, env.splits.train);
      it = cache.emplace(std::move(key), f).first;
    }
    member.fitness = it->second;
  }
}

size_t best_of(const Population& pop, const std::vector<size_t>& candidates) {
  size_t best = candidates.front();
  for (size_t c : candidates) {
    if (pop.members[c].ranked_fitness() < pop.members[best].ranked_fitness() ||
        (pop.members[c].ranked_fitness() == pop.members[best].ranked_fitness() && c < best))
      best = c;
  }
  return best;
}

size_t tournament_select(const Population& pop, int k, Rng& rng) {
  std::vector<size_t> candidates;
  candidates.reserve(k);
  for (int i = 0; i < k; ++i)
    candidates.push_back(rand_below(rng, pop.members.size()));
  return best_of(pop, candidates);
}

namespace {

std::vector<size_t> ranked_indices(const Population& pop) {
  std::vector<size_t> idx(pop.members.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return pop.members[a].ranked_fitness() < pop.members[b].ranked_fitness();
  });
  return idx;
}

}  // namespace

Population generational_replace(const Population& old_pop, const Population& offspring,
                                int elite_size) {
  const size_t n = old_pop.members.size();
  Population next;
  next.generation = old_pop.generation + 1;
  next.members.reserve(n);

  auto old_rank = ranked_indices(old_pop);
  for (int i = 0; i < elite_size && i < static_cast<int>(old_rank.size()); ++i)
    next.members.push_back(old_pop.members[old_rank[i]]);

  size_t need = n - next.members.size();
  auto off_rank = ranked_indices(offspring);
  off_rank.resize(std::min(need, off_rank.size()));
  std::sort(off_rank.begin(), off_rank.end());
  for (size_t i : off_rank) next.members.push_back(offspring.members[i]);
  return next;
}

GenerationStats population_stats(const Population& pop, int generation) {
  GenerationStats stats;
  stats.generation = generation;
  double total_size = 0.0;
  double best_train = kWorstFitness;
  for (const auto& m : pop.members) {
    if (m.expr) total_size += size(*m.expr);
    best_train = std::min(best_train, m.ranked_fitness());
  }
  if (!pop.members.empty())
    stats.mean_size = total_size / static_cast<double>(pop.members.size());
  stats.best_train = best_train;
  return stats;
}

void track_best(std::optional<Individual>& best, const Population& pop) {
  for (const auto& m : pop.members)
    if (!best || m.ranked_fitness() < best->ranked_fitness()) best = m;
}

void finalize_best(RunResult& result, const std::optional<Individual>& best,
                   const ProblemEnv& env) {
  if (!best) {
    result.best_train_fitness = kWorstFitness;
    result.best_test_fitness = kWorstFitness;
    result.best_holdout_fitness = kWorstFitness;
    return;
  }
  result.best_genotype = best->genotype;
  result.best_train_fitness = best->ranked_fitness();
  if (best->expr) {
    result.best_test_fitness = fitness_mse(*best->expr, env.exemplars, env.splits.test);
    result.best_holdout_fitness =
        fitness_mse(*best->expr, env.exemplars, env.splits.holdout);
  } else {
    result.best_test_fitness = kWorstFitness;
    result.best_holdout_fitness = kWorstFitness;
  }
}

RunResult run_gp(const RunConfig& config, const ProblemEnv& env, Rng& rng) {
  const int n = config.population_size;
  RunResult result;
  result.variant = to_string(config.variant);
  result.seed = config.seed;

  FitnessCache cache;
  RunState state;
  std::optional<Individual> best;
  StopReason stop = StopReason::generations_done;

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  auto init = [&] {
    Population pop;
    for (auto& tree : ramped_half_and_half(n, config.max_depth, env.prims, rng))
      pop.members.push_back(Individual::from_expr(tree, "init"));
    return pop;
  };

  Population pop = init();

  for (int gen = 1; gen <= config.generations; ++gen) {
    const double gen_start = elapsed();
    pop.generation = gen;
    evaluate_population(pop, env, cache, state, CacheKeyMode::raw, &result.errors);
    result.generations.push_back(population_stats(pop, gen));
    track_best(best, pop);
    const size_t stats_at = result.generations.size() - 1;
    auto close_gen = [&] { result.generations[stats_at].duration_s = elapsed() - gen_start; };

    if (gen == config.generations) {
      close_gen();
      break;
    }
    if (config.max_runtime_s > 0 && elapsed() >= config.max_runtime_s) {
      stop = StopReason::time_budget;
      close_gen();
      break;
    }

    if (config.variant == Variant::random_search) {
      pop = init();
      close_gen();
      continue;
    }

    Population offspring;
    offspring.generation = gen;
    while (static_cast<int>(offspring.members.size()) < n) {
      const Individual& pa = pop.members[tournament_select(pop, config.tournament_k, rng)];
      const Individual& pb = pop.members[tournament_select(pop, config.tournament_k, rng)];
      Expr c1 = *pa.expr;
      Expr c2 = *pb.expr;
      if (rand_unit(rng) < config.p_crossover) {
        auto [k1, k2] = subtree_crossover(c1, c2, config.max_depth, rng);
        c1 = std::move(k1);
        c2 = std::move(k2);
      }
      if (rand_unit(rng) < config.p_mutation)
        c1 = subtree_mutation(c1, config.max_depth, env.prims, rng);
      if (rand_unit(rng) < config.p_mutation)
        c2 = subtree_mutation(c2, config.max_depth, env.prims, rng);
      offspring.members.push_back(Individual::from_expr(c1, "crossover"));
      offspring.members.push_back(Individual::from_expr(c2, "crossover"));
    }
    pop = generational_replace(pop, offspring, config.elite_size);
    close_gen();
  }

  result.fe_events = state.fe_events;
  result.stop_reason = stop;
  result.duration_s = elapsed();
  finalize_best(result, best, env);
  return result;
}

}  // namespace llmgp
