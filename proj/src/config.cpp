#include "llmgp/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace llmgp {

const char* to_string(ErrorClass e) {
  switch (e) {
    case ErrorClass::None: return "none";
    case ErrorClass::JSONDecode: return "json_decode";
    case ErrorClass::MissingKey: return "missing_key";
    case ErrorClass::TypeError: return "type_error";
    case ErrorClass::MalformedExpression: return "malformed_expression";
    case ErrorClass::ContextOverflow: return "context_overflow";
    case ErrorClass::ServiceError: return "service_error";
    case ErrorClass::BudgetExceeded: return "budget_exceeded";
  }
  return "none";
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::random_search: return "random_search";
    case Variant::tutorial_gp: return "tutorial_gp";
    case Variant::llm_direct: return "llm_direct";
    case Variant::llm_gp: return "llm_gp";
    case Variant::llm_gp_mu_xo: return "llm_gp_mu_xo";
  }
  return "tutorial_gp";
}

Variant variant_from_string(const std::string& name) {
  if (name == "random_search") return Variant::random_search;
  if (name == "tutorial_gp") return Variant::tutorial_gp;
  if (name == "llm_direct") return Variant::llm_direct;
  if (name == "llm_gp") return Variant::llm_gp;
  if (name == "llm_gp_mu_xo") return Variant::llm_gp_mu_xo;
  throw ConfigError("unknown variant: " + name);
}

const char* to_string(BackendKind k) {
  switch (k) {
    case BackendKind::none: return "none";
    case BackendKind::mock_scripted: return "mock_scripted";
    case BackendKind::mock_generative: return "mock_generative";
    case BackendKind::mock_faulty: return "mock_faulty";
    case BackendKind::remote_http: return "remote_http";
  }
  return "none";
}

BackendKind backend_kind_from_string(const std::string& name) {
  if (name == "none") return BackendKind::none;
  if (name == "mock_scripted") return BackendKind::mock_scripted;
  if (name == "mock_generative") return BackendKind::mock_generative;
  if (name == "mock_faulty") return BackendKind::mock_faulty;
  if (name == "remote_http") return BackendKind::remote_http;
  throw ConfigError("unknown backend: " + name);
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::generations_done: return "generations_done";
    case StopReason::time_budget: return "time_budget";
    case StopReason::money_budget: return "money_budget";
  }
  return "generations_done";
}

StopReason stop_reason_from_string(const std::string& name) {
  if (name == "generations_done") return StopReason::generations_done;
  if (name == "time_budget") return StopReason::time_budget;
  if (name == "money_budget") return StopReason::money_budget;
  throw ConfigError("unknown stop reason: " + name);
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    throw ConfigError("invalid integer for " + key + ": " + value);
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0' ||
      value.find('-') != std::string::npos)
    throw ConfigError("invalid unsigned integer for " + key + ": " + value);
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    throw ConfigError("invalid number for " + key + ": " + value);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool apply_fault_setting(RunConfig& config, const std::string& key,
                         const std::string& value) {
  const std::string prefix = "backend.fault.";
  if (key.rfind(prefix, 0) != 0) return false;
  std::string rest = key.substr(prefix.size());
  size_t dot = rest.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= rest.size())
    throw ConfigError("fault keys look like backend.fault.<op>.<class>: " + key);
  std::string op = rest.substr(0, dot);
  std::string field = rest.substr(dot + 1);
  FaultRates& rates = op == "default" ? config.backend.default_fault_rates
                                      : config.backend.fault_rates[op];
  double rate = parse_double(key, value);
  if (rate < 0.0 || rate > 1.0)
    throw ConfigError("fault rate out of [0, 1] for " + key + ": " + value);
  if (field == "malformed_json") rates.malformed_json = rate;
  else if (field == "missing_key") rates.missing_key = rate;
  else if (field == "truncated") rates.truncated = rate;
  else if (field == "service_error") rates.service_error = rate;
  else throw ConfigError("unknown fault class in " + key);
  return true;
}

void emit_fault_rates(std::map<std::string, std::string>& out, const std::string& op,
                      const FaultRates& rates) {
  const std::string prefix = "backend.fault." + op + ".";
  if (rates.malformed_json != 0.0)
    out[prefix + "malformed_json"] = format_double(rates.malformed_json);
  if (rates.missing_key != 0.0)
    out[prefix + "missing_key"] = format_double(rates.missing_key);
  if (rates.truncated != 0.0) out[prefix + "truncated"] = format_double(rates.truncated);
  if (rates.service_error != 0.0)
    out[prefix + "service_error"] = format_double(rates.service_error);
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  if (apply_fault_setting(config, key, value)) return;

  if (key == "variant") config.variant = variant_from_string(value);
  else if (key == "seed") config.seed = parse_u64(key, value);
  else if (key == "runs") config.runs = static_cast<int>(parse_int(key, value));
  else if (key == "population_size")
    config.population_size = static_cast<int>(parse_int(key, value));
  else if (key == "generations")
    config.generations = static_cast<int>(parse_int(key, value));
  else if (key == "p_crossover") config.p_crossover = parse_double(key, value);
  else if (key == "p_mutation") config.p_mutation = parse_double(key, value);
  else if (key == "n_shots") config.n_shots = static_cast<int>(parse_int(key, value));
  else if (key == "max_depth") config.max_depth = static_cast<int>(parse_int(key, value));
  else if (key == "tournament_k")
    config.tournament_k = static_cast<int>(parse_int(key, value));
  else if (key == "elite_size")
    config.elite_size = static_cast<int>(parse_int(key, value));
  else if (key == "budget_usd") config.budget_usd = parse_double(key, value);
  else if (key == "max_runtime_s") config.max_runtime_s = parse_double(key, value);
  else if (key == "exemplars_gp")
    config.exemplars_gp = static_cast<int>(parse_int(key, value));
  else if (key == "exemplars_llm")
    config.exemplars_llm = static_cast<int>(parse_int(key, value));
  else if (key == "model_id") config.model_id = value;
  else if (key == "temperature") config.temperature = parse_double(key, value);
  else if (key == "max_tokens") config.max_tokens = static_cast<int>(parse_int(key, value));
  else if (key == "context_window")
    config.context_window = static_cast<int>(parse_int(key, value));
  else if (key == "price_prompt_per_1k")
    config.price_prompt_per_1k = parse_double(key, value);
  else if (key == "price_completion_per_1k")
    config.price_completion_per_1k = parse_double(key, value);
  else if (key == "retry.base_delay_s")
    config.retry.base_delay_s = parse_double(key, value);
  else if (key == "retry.multiplier") config.retry.multiplier = parse_double(key, value);
  else if (key == "retry.max_attempts")
    config.retry.max_attempts = static_cast<int>(parse_int(key, value));
  else if (key == "retry.jitter") config.retry.jitter = parse_double(key, value);
  else if (key == "backend") config.backend.kind = backend_kind_from_string(value);
  else if (key == "backend.replay") config.backend.replay_path = value;
  else if (key == "backend.endpoint") config.backend.endpoint = value;
  else if (key == "backend.inner")
    config.backend.faulty_inner = backend_kind_from_string(value);
  else if (key == "prompt_catalog") config.prompt_catalog_path = value;
  else throw ConfigError("unknown setting: " + key);
}

void apply_config(RunConfig& config, const std::map<std::string, std::string>& settings) {
  for (const auto& [key, value] : settings) apply_setting(config, key, value);
}

std::map<std::string, std::string> config_to_map(const RunConfig& config) {
  std::map<std::string, std::string> out;
  out["variant"] = to_string(config.variant);
  out["seed"] = std::to_string(config.seed);
  out["runs"] = std::to_string(config.runs);
  out["population_size"] = std::to_string(config.population_size);
  out["generations"] = std::to_string(config.generations);
  out["p_crossover"] = format_double(config.p_crossover);
  out["p_mutation"] = format_double(config.p_mutation);
  out["n_shots"] = std::to_string(config.n_shots);
  out["max_depth"] = std::to_string(config.max_depth);
  out["tournament_k"] = std::to_string(config.tournament_k);
  out["elite_size"] = std::to_string(config.elite_size);
  out["budget_usd"] = format_double(config.budget_usd);
  out["max_runtime_s"] = format_double(config.max_runtime_s);
  out["exemplars_gp"] = std::to_string(config.exemplars_gp);
  out["exemplars_llm"] = std::to_string(config.exemplars_llm);
  out["model_id"] = config.model_id;
  out["temperature"] = format_double(config.temperature);
  out["max_tokens"] = std::to_string(config.max_tokens);
  out["context_window"] = std::to_string(config.context_window);
  out["price_prompt_per_1k"] = format_double(config.price_prompt_per_1k);
  out["price_completion_per_1k"] = format_double(config.price_completion_per_1k);
  out["retry.base_delay_s"] = format_double(config.retry.base_delay_s);
  out["retry.multiplier"] = format_double(config.retry.multiplier);
  out["retry.max_attempts"] = std::to_string(config.retry.max_attempts);
  out["retry.jitter"] = format_double(config.retry.jitter);
  out["backend"] = to_string(config.backend.kind);
  if (!config.backend.replay_path.empty()) out["backend.replay"] = config.backend.replay_path;
  out["backend.endpoint"] = config.backend.endpoint;
  out["backend.inner"] = to_string(config.backend.faulty_inner);
  if (!config.prompt_catalog_path.empty()) out["prompt_catalog"] = config.prompt_catalog_path;
  emit_fault_rates(out, "default", config.backend.default_fault_rates);
  for (const auto& [op, rates] : config.backend.fault_rates) emit_fault_rates(out, op, rates);
  return out;
}

}  // namespace llmgp
