#include "llmgp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmgp/ea.hpp"
#include "llmgp/operators.hpp"
#include "llmgp/prompts.hpp"

namespace llmgp {

namespace {

using json = nlohmann::json;

// Independent derived streams so reordering one consumer cannot shift
// another's draws.
enum SeedStream : std::uint64_t {
  kEnvStream = 0,
  kLoopStream = 1,
  kClientStream = 2,
  kGenerativeStream = 3,
  kFaultStream = 4,
};

ErrorClass error_class_from_string(const std::string& name) {
  if (name == "none") return ErrorClass::None;
  if (name == "json_decode") return ErrorClass::JSONDecode;
  if (name == "missing_key") return ErrorClass::MissingKey;
  if (name == "type_error") return ErrorClass::TypeError;
  if (name == "malformed_expression") return ErrorClass::MalformedExpression;
  if (name == "context_overflow") return ErrorClass::ContextOverflow;
  if (name == "service_error") return ErrorClass::ServiceError;
  if (name == "budget_exceeded") return ErrorClass::BudgetExceeded;
  throw ConfigError("unknown error class: " + name);
}

bool is_llm_variant(Variant v) {
  return v == Variant::llm_direct || v == Variant::llm_gp || v == Variant::llm_gp_mu_xo;
}

std::vector<std::string> genotypes(const Population& pop) {
  std::vector<std::string> out;
  out.reserve(pop.members.size());
  for (const auto& m : pop.members) out.push_back(m.genotype);
  return out;
}

RunResult run_llm(const RunConfig& config, CostLedger& ledger) {
  RunResult result;
  result.variant = to_string(config.variant);
  result.seed = config.seed;

  Rng env_rng(derive_seed(config.seed, kEnvStream));
  ProblemEnv env = make_env(config.exemplars_llm, config.n_shots, env_rng);
  Rng rng(derive_seed(config.seed, kLoopStream));

  auto backend = make_backend(config.backend, config, config.seed);
  ClientConfig cc;
  cc.model_id = config.model_id;
  cc.temperature = config.temperature;
  cc.max_tokens = config.max_tokens;
  cc.context_window = config.context_window;
  cc.retry = config.retry;
  LlmClient client(*backend, ledger, cc, derive_seed(config.seed, kClientStream));
  client.set_error_sink(&result.errors);
  const bool simulated = backend->deterministic();
  if (simulated) client.set_sleeper([](double) {});

  TemplateCatalog catalog = config.prompt_catalog_path.empty()
                                ? TemplateCatalog::defaults()
                                : TemplateCatalog::load_file(config.prompt_catalog_path);
  PromptFormulator formulator(catalog, env);
  LlmOperators ops(env, formulator, client, result.errors, rng, config.max_depth);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    if (simulated) return client.virtual_elapsed();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  StopReason stop = StopReason::generations_done;
  auto should_stop = [&] {
    if (ledger.exhausted()) {
      stop = StopReason::money_budget;
      return true;
    }
    if (config.max_runtime_s > 0 && elapsed() >= config.max_runtime_s) {
      stop = StopReason::time_budget;
      return true;
    }
    return false;
  };

  FitnessCache cache;
  RunState state;
  std::optional<Individual> best;
  const int n = config.population_size;

  Population pop;
  for (int gen = 1; gen <= config.generations; ++gen) {
    const double gen_start = elapsed();
    if (config.variant == Variant::llm_direct)
      pop = ops.initialize(n, gen, "direct");
    else if (gen == 1)
      pop = ops.initialize(n, gen, "init");
    pop.generation = gen;
    evaluate_population(pop, env, cache, state, CacheKeyMode::canonical, &result.errors);
    result.generations.push_back(population_stats(pop, gen));
    track_best(best, pop);
    const size_t stats_at = result.generations.size() - 1;
    auto close_gen = [&] {
      result.generations[stats_at].duration_s = elapsed() - gen_start;
    };

    if (gen == config.generations || should_stop()) {
      close_gen();
      break;
    }
    if (config.variant == Variant::llm_direct) {
      close_gen();
      continue;
    }

    // Variation. One crossover prompt per pair, unconditionally; mutation
    // gated per child by p_mutation. llm_gp selects parents and replaces
    // via prompts; llm_gp_mu_xo keeps tournament selection and truncation
    // replacement with elitism.
    const std::vector<std::string> samples = genotypes(pop);
    Population offspring;
    offspring.generation = gen;
    bool aborted = false;
    const int pairs = (n + 1) / 2;
    for (int p = 0; p < pairs; ++p) {
      if (should_stop()) {
        aborted = true;
        break;
      }
      size_t ia, ib;
      if (config.variant == Variant::llm_gp) {
        auto sel = ops.select(pop, 2, gen);
        ia = sel[0];
        ib = sel[1];
      } else {
        ia = tournament_select(pop, config.tournament_k, rng);
        ib = tournament_select(pop, config.tournament_k, rng);
      }
      auto [ca, cb] = ops.crossover(pop.members[ia], pop.members[ib], samples, gen);
      if (rand_unit(rng) < config.p_mutation) ca = ops.mutate(ca, samples, gen);
      if (rand_unit(rng) < config.p_mutation) cb = ops.mutate(cb, samples, gen);
      offspring.members.push_back(std::move(ca));
      offspring.members.push_back(std::move(cb));
    }
    if (aborted) {
      close_gen();
      break;
    }
    if (static_cast<int>(offspring.members.size()) > n) offspring.members.resize(n);

    if (config.variant == Variant::llm_gp) {
      Population pool;
      pool.generation = gen;
      pool.members = pop.members;
      for (auto& m : offspring.members) pool.members.push_back(std::move(m));
      pop = ops.replace(pool, n, gen);
      pop.generation = gen + 1;
    } else {
      pop = generational_replace(pop, offspring, config.elite_size);
    }
    close_gen();
  }

  // llm_gp delegates the final best-of-population pick to the model; the
  // other variants report the numerically tracked best.
  if (config.variant == Variant::llm_gp && !pop.members.empty())
    best = pop.members[ops.best(pop, pop.generation)];

  result.fe_events = state.fe_events;
  result.stop_reason = stop;
  result.duration_s = elapsed();
  finalize_best(result, best, env);

  result.calls = client.call_log();
  for (const auto& r : result.calls) {
    result.cost_usd += ledger.cost_of(r.n_prompt_tokens, r.n_completion_tokens);
    result.prompt_tokens += r.n_prompt_tokens;
    result.completion_tokens += r.n_completion_tokens;
  }
  return result;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

void write_summary_csv(const BatchResult& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "variant,runs,mean_duration_seconds,stdev_duration_seconds,mean_cost_usd\n";

  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunResult*>> groups;
  for (const auto& run : batch.runs) {
    if (!groups.count(run.variant)) order.push_back(run.variant);
    groups[run.variant].push_back(&run);
  }
  for (const auto& variant : order) {
    const auto& runs = groups[variant];
    double mean_d = 0.0, mean_c = 0.0;
    for (const auto* r : runs) {
      mean_d += r->duration_s;
      mean_c += r->cost_usd;
    }
    mean_d /= static_cast<double>(runs.size());
    mean_c /= static_cast<double>(runs.size());
    double var = 0.0;
    for (const auto* r : runs) var += (r->duration_s - mean_d) * (r->duration_s - mean_d);
    double stdev = runs.size() > 1
                       ? std::sqrt(var / static_cast<double>(runs.size() - 1))
                       : 0.0;
    out << variant << ',' << runs.size() << ',' << fmt("%.6f", mean_d) << ','
        << fmt("%.6f", stdev) << ',' << fmt("%.6f", mean_c) << "\n";
  }
}

void write_generations_csv(const BatchResult& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "run,variant,seed,generation,mean_size,duration_seconds,best_train_fitness\n";
  for (size_t i = 0; i < batch.runs.size(); ++i) {
    const auto& run = batch.runs[i];
    for (const auto& g : run.generations) {
      out << i << ',' << run.variant << ',' << run.seed << ',' << g.generation << ','
          << fmt("%.4f", g.mean_size) << ',' << fmt("%.6f", g.duration_s) << ','
          << fmt("%.10g", g.best_train) << "\n";
    }
  }
}

void write_calls_jsonl(const BatchResult& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& run : batch.runs)
    for (const auto& r : run.calls) append_call_log(out, r);
}

void write_errors_csv(const BatchResult& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "variant,operator,error_class,errors,calls,rate\n";

  std::vector<std::string> order;
  struct VariantTally {
    std::map<std::string, long> calls;
    std::map<std::string, std::map<ErrorClass, long>> errors;
  };
  std::map<std::string, VariantTally> tallies;
  for (const auto& run : batch.runs) {
    if (!tallies.count(run.variant)) order.push_back(run.variant);
    VariantTally& t = tallies[run.variant];
    for (const auto& r : run.calls) ++t.calls[r.operator_tag];
    for (const auto& [op, classes] : run.errors.counts)
      for (const auto& [ec, count] : classes) t.errors[op][ec] += count;
  }

  for (const auto& variant : order) {
    const VariantTally& t = tallies[variant];
    std::vector<std::string> ops;
    for (const auto& [op, _] : t.calls) ops.push_back(op);
    for (const auto& [op, _] : t.errors)
      if (!t.calls.count(op)) ops.push_back(op);
    std::sort(ops.begin(), ops.end());

    for (const auto& op : ops) {
      long calls = t.calls.count(op) ? t.calls.at(op) : 0;
      long emitted = 0;
      if (t.errors.count(op)) {
        for (const auto& [ec, count] : t.errors.at(op)) {
          if (count == 0) continue;
          double rate = calls > 0 ? static_cast<double>(count) / calls : 0.0;
          out << variant << ',' << op << ',' << to_string(ec) << ',' << count << ','
              << calls << ',' << fmt("%.6f", rate) << "\n";
          ++emitted;
        }
      }
      if (emitted == 0)
        out << variant << ',' << op << ",none,0," << calls << ",0.000000\n";
    }
  }
}

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const RunConfig& config,
                                      std::uint64_t run_seed) {
  switch (spec.kind) {
    case BackendKind::none:
      throw ConfigError(
          "this variant issues prompts; set backend to mock_scripted, "
          "mock_generative, mock_faulty or remote_http");
    case BackendKind::mock_scripted:
      if (spec.replay_path.empty())
        throw ConfigError("backend=mock_scripted needs backend.replay=<llm_calls.jsonl>");
      return std::make_unique<ScriptedBackend>(
          ScriptedBackend::from_file(spec.replay_path));
    case BackendKind::mock_generative:
      return std::make_unique<GenerativeBackend>(derive_seed(run_seed, kGenerativeStream),
                                                 PrimitiveSet::demo(), config.max_depth);
    case BackendKind::mock_faulty: {
      if (spec.faulty_inner != BackendKind::mock_generative &&
          spec.faulty_inner != BackendKind::mock_scripted)
        throw ConfigError("backend.inner must be mock_generative or mock_scripted");
      BackendSpec inner_spec = spec;
      inner_spec.kind = spec.faulty_inner;
      auto faulty = std::make_unique<FaultyBackend>(
          make_backend(inner_spec, config, run_seed), derive_seed(run_seed, kFaultStream));
      faulty->set_default_rates(spec.default_fault_rates);
      for (const auto& [op, rates] : spec.fault_rates) faulty->set_rates(op, rates);
      return faulty;
    }
    case BackendKind::remote_http: {
      HttpBackendConfig hc;
      hc.endpoint = spec.endpoint;
      return std::make_unique<HttpBackend>(hc);
    }
  }
  throw ConfigError("unknown backend kind");
}

RunResult run_single(const RunConfig& config, CostLedger& ledger) {
  if (is_llm_variant(config.variant)) return run_llm(config, ledger);
  Rng env_rng(derive_seed(config.seed, kEnvStream));
  ProblemEnv env = make_env(config.exemplars_gp, config.n_shots, env_rng);
  Rng rng(derive_seed(config.seed, kLoopStream));
  return run_gp(config, env, rng);
}

BatchResult run_batch(const RunConfig& config) {
  BatchResult batch;
  CostLedger ledger(config.price_prompt_per_1k, config.price_completion_per_1k,
                    config.budget_usd);
  for (int i = 0; i < config.runs; ++i) {
    if (i > 0 && ledger.exhausted()) break;
    RunConfig rc = config;
    rc.seed = config.seed + static_cast<std::uint64_t>(i);
    batch.runs.push_back(run_single(rc, ledger));
  }
  batch.total_cost_usd = ledger.accumulated();
  return batch;
}

void write_reports(const BatchResult& batch, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_summary_csv(batch, out_dir + "/summary.csv");
  write_generations_csv(batch, out_dir + "/generations.csv");
  write_calls_jsonl(batch, out_dir + "/llm_calls.jsonl");
  write_errors_csv(batch, out_dir + "/errors.csv");
}

void write_results_json(const BatchResult& batch, const RunConfig& config,
                        const std::string& path) {
  json doc;
  doc["schema"] = "llmgp.results.v1";
  doc["config"] = config_to_map(config);
  doc["total_cost_usd"] = batch.total_cost_usd;
  doc["runs"] = json::array();
  for (const auto& run : batch.runs) {
    json jr;
    jr["variant"] = run.variant;
    jr["seed"] = run.seed;
    jr["best_genotype"] = run.best_genotype;
    jr["best_train_fitness"] = run.best_train_fitness;
    jr["best_test_fitness"] = run.best_test_fitness;
    jr["best_holdout_fitness"] = run.best_holdout_fitness;
    jr["fe_events"] = run.fe_events;
    jr["cost_usd"] = run.cost_usd;
    jr["prompt_tokens"] = run.prompt_tokens;
    jr["completion_tokens"] = run.completion_tokens;
    jr["duration_seconds"] = run.duration_s;
    jr["stop_reason"] = to_string(run.stop_reason);
    jr["generations"] = json::array();
    for (const auto& g : run.generations)
      jr["generations"].push_back({{"generation", g.generation},
                                   {"mean_size", g.mean_size},
                                   {"duration_seconds", g.duration_s},
                                   {"best_train_fitness", g.best_train}});
    jr["errors"] = json::array();
    for (const auto& [op, classes] : run.errors.counts)
      for (const auto& [ec, count] : classes)
        jr["errors"].push_back(
            {{"operator", op}, {"error_class", to_string(ec)}, {"count", count}});
    jr["calls"] = json::array();
    for (const auto& r : run.calls) jr["calls"].push_back(record_to_json(r));
    doc["runs"].push_back(std::move(jr));
  }
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << "\n";
}

BatchResult read_results_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw std::runtime_error(path + " is not valid JSON");
  if (!doc.is_object() || doc.value("schema", "") != "llmgp.results.v1")
    throw std::runtime_error(path + " does not hold llmgp.results.v1 data");

  BatchResult batch;
  batch.total_cost_usd = doc.value("total_cost_usd", 0.0);
  for (const auto& jr : doc.at("runs")) {
    RunResult run;
    run.variant = jr.at("variant").get<std::string>();
    run.seed = jr.at("seed").get<std::uint64_t>();
    run.best_genotype = jr.at("best_genotype").get<std::string>();
    run.best_train_fitness = jr.at("best_train_fitness").get<double>();
    run.best_test_fitness = jr.at("best_test_fitness").get<double>();
    run.best_holdout_fitness = jr.at("best_holdout_fitness").get<double>();
    run.fe_events = jr.at("fe_events").get<long>();
    run.cost_usd = jr.at("cost_usd").get<double>();
    run.prompt_tokens = jr.at("prompt_tokens").get<long>();
    run.completion_tokens = jr.at("completion_tokens").get<long>();
    run.duration_s = jr.at("duration_seconds").get<double>();
    run.stop_reason = stop_reason_from_string(jr.at("stop_reason").get<std::string>());
    for (const auto& jg : jr.at("generations")) {
      GenerationStats g;
      g.generation = jg.at("generation").get<int>();
      g.mean_size = jg.at("mean_size").get<double>();
      g.duration_s = jg.at("duration_seconds").get<double>();
      g.best_train = jg.at("best_train_fitness").get<double>();
      run.generations.push_back(g);
    }
    for (const auto& je : jr.at("errors"))
      run.errors.counts[je.at("operator").get<std::string>()]
                       [error_class_from_string(je.at("error_class").get<std::string>())] =
          je.at("count").get<long>();
    for (const auto& jc : jr.at("calls")) run.calls.push_back(record_from_json(jc));
    batch.runs.push_back(std::move(run));
  }
  return batch;
}

void write_reports_from_file(const std::string& results_path, const std::string& out_dir) {
  write_reports(read_results_json(results_path), out_dir);
}

}  // namespace llmgp
