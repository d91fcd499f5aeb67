#include "llmgp/prompts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace llmgp {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.1f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%g", v);
  }
  return buf;
}

std::string format_fitness(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string python_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "'" + items[i] + "'";
  }
  return out + "]";
}

std::string python_list_numbers(const std::vector<double>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_number(values[i]);
  }
  return out + "]";
}

std::optional<std::vector<std::string>> parse_python_list(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  if (i >= text.size() || text[i] != '[') return std::nullopt;
  ++i;
  skip_ws();
  if (i < text.size() && text[i] == ']') return out;
  for (;;) {
    skip_ws();
    if (i >= text.size() || text[i] != '\'') return std::nullopt;
    size_t end = text.find('\'', i + 1);
    if (end == std::string::npos) return std::nullopt;
    out.push_back(text.substr(i + 1, end - i - 1));
    i = end + 1;
    skip_ws();
    if (i < text.size() && text[i] == ',') {
      ++i;
      continue;
    }
    if (i < text.size() && text[i] == ']') return out;
    return std::nullopt;
  }
}

std::string render_individuals(const std::vector<std::pair<std::string, double>>& inds) {
  std::string out;
  for (size_t i = 0; i < inds.size(); ++i) {
    if (i) out += "\n";
    out += inds[i].first + " : " + format_fitness(inds[i].second);
  }
  return out;
}

std::string render_template(const std::string& body,
                            const std::map<std::string, std::string>& args) {
  std::string out;
  out.reserve(body.size());
  for (size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        out += '{';
        ++i;
        continue;
      }
      size_t end = body.find('}', i);
      if (end == std::string::npos)
        throw TemplateError("unterminated placeholder");
      std::string name = body.substr(i + 1, end - i - 1);
      auto it = args.find(name);
      if (it == args.end()) throw TemplateError("no value for placeholder {" + name + "}");
      out += it->second;
      i = end;
    } else if (c == '}') {
      if (i + 1 < body.size() && body[i + 1] == '}') {
        out += '}';
        ++i;
        continue;
      }
      throw TemplateError("stray '}' outside placeholder");
    } else {
      out += c;
    }
  }
  return out;
}

TemplateCatalog TemplateCatalog::defaults() {
  TemplateCatalog c;
  const std::string direct =
      "Generate a mathematical expression for the following variables.  {exemplars}\n"
      "\n"
      "Use the operators: {constraints}.\n"
      "\n"
      "Provide no additional text in response. Format output in JSON as "
      "{{\"expression\": \"<expression>\"}}";
  c.set("init", direct);
  c.set("direct_llm", direct);
  c.set("rephrase_mutation",
        "{n_samples} examples of mathematical expressions are: {samples}\n"
        "\n"
        "Rephrase the mathematical expression {expression} into a new mathematical "
        "expression. Use the listed symbols {constraints}.\n"
        "\n"
        "Provide no additional text in response. Format output in JSON as "
        "{{\"new_expression\": \"<new expression>\"}}");
  c.set("crossover",
        "{n_samples} examples of mathematical expressions are: {samples}\n"
        "\n"
        "Recombine the mathematical expressions {expression} and create {n_children} "
        "new expressions from the terms. Use only the the existing expression when "
        "creating the new expressions.\n"
        "\n"
        "Provide no additional text in response. Format output in JSON as "
        "{{\"expressions\": [\"<expression>\"]}}");
  const std::string select =
      "{n_samples} examples of high quality elements are: {samples}\n"
      "\n"
      "Select {population_size} elements of high quality from the following list: "
      "{individuals}\n"
      "\n"
      "Provide no additional text in response. Format output in JSON as "
      "{{\"individuals\": [\"<element>\"]}}";
  c.set("selection", select);
  c.set("replacement", select);
  c.set("sort_population",
        "An example of an order is in the following list: {samples}\n"
        "\n"
        "Order the elements of the following list: {individuals}\n"
        "\n"
        "Provide no additional text in response. Format output in JSON as "
        "{{\"individuals\": [\"<element>\"]}}");
  c.set("evaluation",
        "{n_samples} examples outputs from mathematical expressions are: {samples}\n"
        "\n"
        "Provide the output from the evaluation of the mathematical expression "
        "{expression} on the following list of variables: {exemplars}\n"
        "\n"
        "Provide no additional text in response. Format output in JSON as "
        "{{\"outputs\": [\"<output>\"]}}");
  c.set("fitness_measure",
        "{n_samples} examples numerical quality scores for mathematical expressions "
        "are: {samples}\n"
        "\n"
        "Provide a numerical quality score based on the list of outputs from "
        "expression {expression}: {outputs} When comparing it to the following list "
        "of targets: {targets}\n"
        "\n"
        "Provide no additional text in response. Format output in JSON as "
        "{{\"fitness\": \"<quality>\"}}");
  return c;
}

TemplateCatalog TemplateCatalog::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot open template catalog: " + path);
  TemplateCatalog c = defaults();
  std::string line, section, body;
  bool in_section = false;
  bool any = false;
  auto flush = [&] {
    if (!in_section) return;
    // drop leading/trailing blank lines
    size_t a = body.find_first_not_of('\n');
    size_t b = body.find_last_not_of('\n');
    c.set(section, a == std::string::npos ? "" : body.substr(a, b - a + 1));
  };
  while (std::getline(in, line)) {
    if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
      flush();
      section = line.substr(1, line.size() - 2);
      body.clear();
      in_section = true;
      any = true;
      continue;
    }
    if (!in_section) {
      if (line.empty() || line[0] == '#') continue;
      throw TemplateError("catalog content before first [operator] header");
    }
    body += line;
    body += '\n';
  }
  flush();
  if (!any) throw TemplateError("template catalog is empty: " + path);
  return c;
}

const std::string& TemplateCatalog::body(const std::string& op) const {
  auto it = templates_.find(op);
  if (it == templates_.end()) throw TemplateError("no template for operator '" + op + "'");
  return it->second;
}

void TemplateCatalog::set(const std::string& op, std::string body) {
  templates_[op] = std::move(body);
}

PromptFormulator::PromptFormulator(const TemplateCatalog& catalog, const ProblemEnv& env)
    : catalog_(catalog), env_(env) {}

std::vector<std::string> PromptFormulator::sample_subset(
    const std::vector<std::string>& samples, Rng& rng) const {
  size_t k = std::min<size_t>(env_.n_shots, samples.size());
  std::vector<size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + rand_below(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  out.reserve(k);
  for (size_t i : idx) out.push_back(samples[i]);
  return out;
}

std::vector<std::string> PromptFormulator::best_of(
    const std::vector<std::pair<std::string, double>>& inds, bool sorted_all) const {
  std::vector<size_t> idx(inds.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return inds[a].second < inds[b].second; });
  size_t k = sorted_all ? inds.size() : std::min<size_t>(env_.n_shots, inds.size());
  std::vector<std::string> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(inds[idx[i]].first);
  return out;
}

namespace {

std::string exemplar_dicts(const std::vector<Exemplar>& exemplars) {
  std::string out = "[";
  for (size_t i = 0; i < exemplars.size(); ++i) {
    if (i) out += ", ";
    out += "{'x0': " + format_number(exemplars[i].x.x0) +
           ", 'x1': " + format_number(exemplars[i].x.x1) +
           ", 'y': " + format_number(exemplars[i].y) + "}";
  }
  return out + "]";
}

std::string point_dicts(const std::vector<Point>& points) {
  std::string out = "[";
  for (size_t i = 0; i < points.size(); ++i) {
    if (i) out += ", ";
    out += "{'x0': " + format_number(points[i].x0) +
           ", 'x1': " + format_number(points[i].x1) + "}";
  }
  return out + "]";
}

}  // namespace

std::string PromptFormulator::init_prompt() const {
  return render_template(catalog_.body("init"),
                         {{"exemplars", exemplar_dicts(env_.exemplars)},
                          {"constraints", python_list(env_.prims.symbols())}});
}

std::string PromptFormulator::direct_prompt() const {
  return render_template(catalog_.body("direct_llm"),
                         {{"exemplars", exemplar_dicts(env_.exemplars)},
                          {"constraints", python_list(env_.prims.symbols())}});
}

std::string PromptFormulator::mutation_prompt(const std::string& expression,
                                              const std::vector<std::string>& samples,
                                              Rng& rng) const {
  std::vector<std::string> subset = sample_subset(samples, rng);
  return render_template(
      catalog_.body("rephrase_mutation"),
      {{"n_samples", std::to_string(subset.size())},
       {"samples", samples.empty() ? "" : python_list(subset)},
       {"expression", expression},
       {"constraints", python_list(env_.prims.symbols())}});
}

std::string PromptFormulator::crossover_prompt(const std::string& parent_a,
                                               const std::string& parent_b, int n_children,
                                               const std::vector<std::string>& samples,
                                               Rng& rng) const {
  std::vector<std::string> subset = sample_subset(samples, rng);
  return render_template(
      catalog_.body("crossover"),
      {{"n_samples", std::to_string(subset.size())},
       {"samples", samples.empty() ? "" : python_list(subset)},
       {"expression", python_list({parent_a, parent_b})},
       {"n_children", std::to_string(n_children)}});
}

std::string PromptFormulator::selection_prompt(
    const std::vector<std::pair<std::string, double>>& inds, int select_count) const {
  std::vector<std::string> samples = best_of(inds);
  return render_template(catalog_.body("selection"),
                         {{"n_samples", std::to_string(samples.size())},
                          {"samples", python_list(samples)},
                          {"population_size", std::to_string(select_count)},
                          {"individuals", render_individuals(inds)}});
}

std::string PromptFormulator::replacement_prompt(
    const std::vector<std::pair<std::string, double>>& inds, int keep_count) const {
  std::vector<std::string> samples = best_of(inds);
  return render_template(catalog_.body("replacement"),
                         {{"n_samples", std::to_string(samples.size())},
                          {"samples", python_list(samples)},
                          {"population_size", std::to_string(keep_count)},
                          {"individuals", render_individuals(inds)}});
}

std::string PromptFormulator::sort_prompt(
    const std::vector<std::pair<std::string, double>>& inds) const {
  // The example order is the sampled genotypes sorted best first.
  std::vector<std::pair<std::string, double>> pool = inds;
  std::stable_sort(pool.begin(), pool.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  size_t k = std::min<size_t>(env_.n_shots, pool.size());
  std::vector<std::string> example;
  example.reserve(k);
  for (size_t i = 0; i < k; ++i) example.push_back(pool[i].first);
  return render_template(catalog_.body("sort_population"),
                         {{"samples", python_list(example)},
                          {"individuals", render_individuals(inds)}});
}

std::string PromptFormulator::evaluation_prompt(const std::string& expression,
                                                const std::vector<Point>& points) const {
  size_t k = std::min<size_t>(env_.n_shots, env_.exemplars.size());
  std::vector<double> sample_outputs;
  for (size_t i = 0; i < k; ++i) sample_outputs.push_back(env_.exemplars[i].y);
  return render_template(catalog_.body("evaluation"),
                         {{"n_samples", std::to_string(k)},
                          {"samples", python_list_numbers(sample_outputs)},
                          {"expression", expression},
                          {"exemplars", point_dicts(points)}});
}

std::string PromptFormulator::fitness_prompt(const std::string& expression,
                                             const std::vector<double>& outputs,
                                             const std::vector<double>& targets) const {
  size_t k = std::min<size_t>(env_.n_shots, size_t{2});
  std::vector<double> sample_scores;
  for (size_t i = 0; i < k; ++i) sample_scores.push_back(static_cast<double>(i));
  return render_template(catalog_.body("fitness_measure"),
                         {{"n_samples", std::to_string(k)},
                          {"samples", python_list_numbers(sample_scores)},
                          {"expression", expression},
                          {"outputs", python_list_numbers(outputs)},
                          {"targets", python_list_numbers(targets)}});
}

namespace {

// Strict decode of the whole content, then key extraction. Valid JSON
// that is not an object counts as a type failure, not a decode failure.
FormatResult<json> decode(const std::string& content, const char* key) {
  FormatResult<json> r;
  json j = json::parse(content, nullptr, false);
  if (j.is_discarded()) {
    r.error = ErrorClass::JSONDecode;
    return r;
  }
  if (!j.is_object()) {
    r.error = ErrorClass::TypeError;
    return r;
  }
  if (!j.contains(key)) {
    r.error = ErrorClass::MissingKey;
    return r;
  }
  r.value = j.at(key);
  return r;
}

FormatResult<std::string> string_field(const std::string& content, const char* key) {
  FormatResult<std::string> r;
  auto d = decode(content, key);
  if (!d.ok()) {
    r.error = d.error;
    return r;
  }
  if (!d.value->is_string()) {
    r.error = ErrorClass::TypeError;
    return r;
  }
  r.value = d.value->get<std::string>();
  return r;
}

FormatResult<std::vector<std::string>> string_list_field(const std::string& content,
                                                         const char* key) {
  FormatResult<std::vector<std::string>> r;
  auto d = decode(content, key);
  if (!d.ok()) {
    r.error = d.error;
    return r;
  }
  if (!d.value->is_array()) {
    r.error = ErrorClass::TypeError;
    return r;
  }
  std::vector<std::string> out;
  for (const auto& item : *d.value) {
    if (!item.is_string()) {
      r.error = ErrorClass::TypeError;
      return r;
    }
    out.push_back(item.get<std::string>());
  }
  r.value = std::move(out);
  return r;
}

std::optional<double> to_double(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string& s = v.get<std::string>();
    char* end = nullptr;
    double d = std::strtod(s.c_str(), &end);
    if (end && end != s.c_str() && *end == '\0') return d;
  }
  return std::nullopt;
}

}  // namespace

FormatResult<std::string> parse_expression_response(const std::string& content) {
  return string_field(content, "expression");
}

FormatResult<std::string> parse_mutation_response(const std::string& content) {
  return string_field(content, "new_expression");
}

FormatResult<std::vector<std::string>> parse_crossover_response(const std::string& content) {
  return string_list_field(content, "expressions");
}

FormatResult<std::vector<std::string>> parse_individuals_response(
    const std::string& content) {
  return string_list_field(content, "individuals");
}

FormatResult<std::vector<double>> parse_outputs_response(const std::string& content) {
  FormatResult<std::vector<double>> r;
  auto d = decode(content, "outputs");
  if (!d.ok()) {
    r.error = d.error;
    return r;
  }
  if (!d.value->is_array()) {
    r.error = ErrorClass::TypeError;
    return r;
  }
  std::vector<double> out;
  for (const auto& item : *d.value) {
    auto v = to_double(item);
    if (!v) {
      r.error = ErrorClass::TypeError;
      return r;
    }
    out.push_back(*v);
  }
  r.value = std::move(out);
  return r;
}

FormatResult<double> parse_fitness_response(const std::string& content) {
  FormatResult<double> r;
  auto d = decode(content, "fitness");
  if (!d.ok()) {
    r.error = d.error;
    return r;
  }
  auto v = to_double(*d.value);
  if (!v) {
    r.error = ErrorClass::TypeError;
    return r;
  }
  r.value = *v;
  return r;
}

std::string format_response_rephrase_mutation(const std::string& content,
                                              const std::string& fallback_expression,
                                              ErrorClass* error) {
  auto r = parse_mutation_response(content);
  if (error) *error = r.error;
  return r.ok() ? *r.value : fallback_expression;
}

}  // namespace llmgp
