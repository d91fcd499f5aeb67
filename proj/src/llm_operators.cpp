#include "llmgp/operators.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace llmgp {

LlmOperators::LlmOperators(const ProblemEnv& env, const PromptFormulator& formulator,
                           LlmClient& client, ErrorStats& errors, Rng& rng, int max_depth)
    : env_(env),
      formulator_(formulator),
      client_(client),
      errors_(errors),
      rng_(rng),
      max_depth_(max_depth) {}

void LlmOperators::note(const std::string& op, bool fallback, ErrorClass error) {
  outcomes_.push_back({op, fallback, error});
}

std::optional<Individual> LlmOperators::individual_from_payload(const std::string& text,
                                                                const std::string& origin) {
  auto e = try_parse(text, env_.prims);
  if (!e) return std::nullopt;
  Individual ind = Individual::from_expr(simplify(*e), origin);
  return ind;
}

std::vector<std::pair<std::string, double>> LlmOperators::rendered(
    const Population& pop) const {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(pop.members.size());
  for (const auto& m : pop.members) out.emplace_back(m.genotype, m.ranked_fitness());
  return out;
}

namespace {

std::optional<std::string> canon_text(const std::string& text, const PrimitiveSet& prims) {
  auto e = try_parse(text, prims);
  if (!e) return std::nullopt;
  return to_text(simplify(*e));
}

std::string canon_member(const Individual& m) {
  if (m.expr) return to_text(simplify(*m.expr));
  return m.genotype;
}

std::vector<size_t> rank_order(const Population& pop) {
  std::vector<size_t> idx(pop.members.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return pop.members[a].ranked_fitness() < pop.members[b].ranked_fitness();
  });
  return idx;
}

}  // namespace

std::optional<size_t> LlmOperators::match_member(const Population& pop,
                                                 const std::string& text,
                                                 const std::vector<bool>* used) const {
  auto canon = canon_text(text, env_.prims);
  if (!canon) return std::nullopt;
  for (size_t i = 0; i < pop.members.size(); ++i) {
    if (used && (*used)[i]) continue;
    if (canon_member(pop.members[i]) == *canon) return i;
  }
  return std::nullopt;
}

Individual LlmOperators::initialize_one(int generation, const std::string& tag) {
  ErrorClass last = ErrorClass::None;
  for (int attempt = 0; attempt < kInitRetries; ++attempt) {
    auto completion = client_.complete(
        tag == "init" ? formulator_.init_prompt() : formulator_.direct_prompt(), tag,
        generation);
    if (!completion.ok()) {
      last = completion.error;
      continue;
    }
    auto parsed = parse_expression_response(completion.record.content);
    if (!parsed.ok()) {
      last = parsed.error;
      errors_.record(tag, parsed.error);
      continue;
    }
    if (auto ind = individual_from_payload(*parsed.value, tag)) {
      note(tag, false, ErrorClass::None);
      return *ind;
    }
    last = ErrorClass::MalformedExpression;
    errors_.record(tag, last);
  }
  // ramped draw: uniform depth in [1, max_depth], method by coin flip
  int d = max_depth_ >= 1 ? 1 + static_cast<int>(rand_below(rng_, max_depth_)) : 0;
  GrowMethod m = rand_below(rng_, 2) == 0 ? GrowMethod::full : GrowMethod::grow;
  Individual ind = Individual::from_expr(random_tree(m, d, env_.prims, rng_), tag);
  note(tag, true, last);
  return ind;
}

Population LlmOperators::initialize(int n, int generation, const std::string& tag) {
  Population pop;
  pop.members.reserve(n);
  for (int i = 0; i < n; ++i) pop.members.push_back(initialize_one(generation, tag));
  return pop;
}

Individual LlmOperators::mutate(const Individual& parent,
                                const std::vector<std::string>& samples, int generation) {
  auto completion = client_.complete(
      formulator_.mutation_prompt(parent.genotype, samples, rng_), "mutation", generation);
  if (!completion.ok()) {
    note("mutation", true, completion.error);
    return parent;
  }
  auto parsed = parse_mutation_response(completion.record.content);
  if (!parsed.ok()) {
    errors_.record("mutation", parsed.error);
    note("mutation", true, parsed.error);
    return parent;
  }
  if (auto child = individual_from_payload(*parsed.value, "mutation")) {
    note("mutation", false, ErrorClass::None);
    return *child;
  }
  errors_.record("mutation", ErrorClass::MalformedExpression);
  note("mutation", true, ErrorClass::MalformedExpression);
  return parent;
}

std::pair<Individual, Individual> LlmOperators::crossover(
    const Individual& parent_a, const Individual& parent_b,
    const std::vector<std::string>& samples, int generation) {
  auto fallback = [&](ErrorClass error, bool format_level) {
    if (format_level) errors_.record("crossover", error);
    note("crossover", true, error);
    return std::make_pair(parent_a, parent_b);
  };

  auto completion = client_.complete(
      formulator_.crossover_prompt(parent_a.genotype, parent_b.genotype, 2, samples, rng_),
      "crossover", generation);
  if (!completion.ok()) return fallback(completion.error, false);
  auto parsed = parse_crossover_response(completion.record.content);
  if (!parsed.ok()) return fallback(parsed.error, true);
  if (parsed.value->size() < 2) return fallback(ErrorClass::TypeError, true);

  std::vector<Individual> children;
  for (const auto& text : *parsed.value) {
    if (auto child = individual_from_payload(text, "crossover")) {
      children.push_back(std::move(*child));
      if (children.size() == 2) break;
    }
  }
  // all or nothing: two valid children or both parents survive
  if (children.size() < 2) return fallback(ErrorClass::MalformedExpression, true);
  note("crossover", false, ErrorClass::None);
  return {std::move(children[0]), std::move(children[1])};
}

std::vector<size_t> LlmOperators::select(const Population& pop, int k, int generation) {
  if (pop.members.empty()) throw std::invalid_argument("selection over empty population");

  auto fallback = [&](ErrorClass error, bool format_level) {
    if (format_level) errors_.record("selection", error);
    note("selection", true, error);
    std::vector<size_t> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) out.push_back(rand_below(rng_, pop.members.size()));
    return out;
  };

  auto completion =
      client_.complete(formulator_.selection_prompt(rendered(pop), k), "selection",
                       generation);
  if (!completion.ok()) return fallback(completion.error, false);

  auto parsed = parse_individuals_response(completion.record.content);
  if (!parsed.ok()) return fallback(parsed.error, true);
  if (parsed.value->size() != static_cast<size_t>(k))
    return fallback(ErrorClass::TypeError, true);

  std::vector<size_t> out;
  out.reserve(k);
  for (const auto& text : *parsed.value) {
    auto idx = match_member(pop, text, nullptr);
    if (!idx) {
      auto parses = canon_text(text, env_.prims);
      return fallback(parses ? ErrorClass::TypeError : ErrorClass::MalformedExpression,
                      true);
    }
    out.push_back(*idx);
  }
  note("selection", false, ErrorClass::None);
  return out;
}

Population LlmOperators::replace(const Population& pool, int n, int generation) {
  if (static_cast<int>(pool.members.size()) < n)
    throw std::invalid_argument("replacement pool smaller than population size");

  auto fallback = [&](ErrorClass error, bool format_level) {
    if (format_level) errors_.record("replacement", error);
    note("replacement", true, error);
    Population next;
    next.generation = pool.generation;
    auto order = rank_order(pool);
    for (int i = 0; i < n; ++i) next.members.push_back(pool.members[order[i]]);
    return next;
  };

  auto completion =
      client_.complete(formulator_.replacement_prompt(rendered(pool), n), "replacement",
                       generation);
  if (!completion.ok()) return fallback(completion.error, false);

  auto parsed = parse_individuals_response(completion.record.content);
  if (!parsed.ok()) return fallback(parsed.error, true);
  if (parsed.value->size() != static_cast<size_t>(n))
    return fallback(ErrorClass::TypeError, true);

  Population next;
  next.generation = pool.generation;
  std::vector<bool> used(pool.members.size(), false);
  for (const auto& text : *parsed.value) {
    auto idx = match_member(pool, text, &used);
    if (!idx) {
      auto parses = canon_text(text, env_.prims);
      return fallback(parses ? ErrorClass::TypeError : ErrorClass::MalformedExpression,
                      true);
    }
    used[*idx] = true;
    next.members.push_back(pool.members[*idx]);
  }
  note("replacement", false, ErrorClass::None);
  return next;
}

size_t LlmOperators::best(const Population& pop, int generation) {
  if (pop.members.empty()) throw std::invalid_argument("best over empty population");

  std::vector<size_t> all(pop.members.size());
  std::iota(all.begin(), all.end(), 0);
  size_t numeric = best_of(pop, all);

  auto completion =
      client_.complete(formulator_.sort_prompt(rendered(pop)), "sort", generation);
  if (pop.members.size() == 1) {
    note("sort", false, ErrorClass::None);
    return 0;
  }
  if (!completion.ok()) {
    note("sort", true, completion.error);
    return numeric;
  }
  auto parsed = parse_individuals_response(completion.record.content);
  if (!parsed.ok() || parsed.value->empty()) {
    ErrorClass err = parsed.ok() ? ErrorClass::TypeError : parsed.error;
    errors_.record("sort", err);
    note("sort", true, err);
    return numeric;
  }
  auto idx = match_member(pop, parsed.value->front(), nullptr);
  if (!idx) {
    errors_.record("sort", ErrorClass::TypeError);
    note("sort", true, ErrorClass::TypeError);
    return numeric;
  }
  note("sort", false, ErrorClass::None);
  return *idx;
}

std::vector<double> LlmOperators::evaluate_outputs(const std::string& genotype,
                                                   const std::vector<Point>& points,
                                                   int generation) {
  auto completion = client_.complete(formulator_.evaluation_prompt(genotype, points),
                                     "evaluation", generation);
  if (!completion.ok()) {
    note("evaluation", true, completion.error);
    return {};
  }
  auto parsed = parse_outputs_response(completion.record.content);
  if (!parsed.ok()) {
    errors_.record("evaluation", parsed.error);
    note("evaluation", true, parsed.error);
    return {};
  }
  if (parsed.value->size() != points.size()) {
    errors_.record("evaluation", ErrorClass::TypeError);
    note("evaluation", true, ErrorClass::TypeError);
    return {};
  }
  note("evaluation", false, ErrorClass::None);
  return *parsed.value;
}

double LlmOperators::fitness_from_outputs(const std::string& genotype,
                                          const std::vector<double>& outputs,
                                          const std::vector<double>& targets,
                                          int generation) {
  auto completion = client_.complete(
      formulator_.fitness_prompt(genotype, outputs, targets), "fitness", generation);
  if (!completion.ok()) {
    note("fitness", true, completion.error);
    return kWorstFitness;
  }
  auto parsed = parse_fitness_response(completion.record.content);
  if (!parsed.ok()) {
    errors_.record("fitness", parsed.error);
    note("fitness", true, parsed.error);
    return kWorstFitness;
  }
  note("fitness", false, ErrorClass::None);
  return *parsed.value;
}

}  // namespace llmgp
