#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llmgp/errors.hpp"
#include "llmgp/problem_env.hpp"
#include "llmgp/rng.hpp"

namespace llmgp {

// ---------------------------------------------------------------------------
// Rendering helpers shared by the formulator and the generative mock.

// Integral values render with one decimal (2 -> "2.0"), everything else
// with %g. Keeps prompt payloads compact and stable.
std::string format_number(double v);

// Fitness rendering: 4 significant digits.
std::string format_fitness(double v);

// "['a', 'b']"; empty input renders "[]".
std::string python_list(const std::vector<std::string>& items);
std::string python_list_numbers(const std::vector<double>& values);

// Inverse of python_list for well-formed input.
std::optional<std::vector<std::string>> parse_python_list(const std::string& text);

// One "genotype : fitness" line per individual, newline-joined.
std::string render_individuals(const std::vector<std::pair<std::string, double>>& inds);

// ---------------------------------------------------------------------------
// Template catalog

// Templates use {name} placeholders; {{ and }} are literal braces (the
// same escaping rules as the catalog file format).
std::string render_template(const std::string& body,
                            const std::map<std::string, std::string>& args);

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Named prompt templates, editable without rebuilding. Operators:
// init, direct_llm, rephrase_mutation, crossover, selection, replacement,
// sort_population, evaluation, fitness_measure.
class TemplateCatalog {
 public:
  static TemplateCatalog defaults();
  // File format: "[operator]" headers, body runs until the next header.
  // Lines before the first header starting with '#' are comments. Starts
  // from defaults(), so a partial file overrides only the operators it
  // names.
  static TemplateCatalog load_file(const std::string& path);

  const std::string& body(const std::string& op) const;
  void set(const std::string& op, std::string body);
  const std::map<std::string, std::string>& all() const { return templates_; }

 private:
  std::map<std::string, std::string> templates_;
};

// ---------------------------------------------------------------------------
// Prompt formulation

// Builds operator prompts from the catalog. Few-shot sections sample
// min(n_shots, |samples|) distinct entries uniformly, keeping source
// order.
class PromptFormulator {
 public:
  PromptFormulator(const TemplateCatalog& catalog, const ProblemEnv& env);

  std::string init_prompt() const;
  std::string direct_prompt() const;
  std::string mutation_prompt(const std::string& expression,
                              const std::vector<std::string>& samples, Rng& rng) const;
  std::string crossover_prompt(const std::string& parent_a, const std::string& parent_b,
                               int n_children, const std::vector<std::string>& samples,
                               Rng& rng) const;
  // select_count entries requested out of the rendered individuals.
  std::string selection_prompt(const std::vector<std::pair<std::string, double>>& inds,
                               int select_count) const;
  std::string replacement_prompt(const std::vector<std::pair<std::string, double>>& inds,
                                 int keep_count) const;
  std::string sort_prompt(const std::vector<std::pair<std::string, double>>& inds) const;
  std::string evaluation_prompt(const std::string& expression,
                                const std::vector<Point>& points) const;
  std::string fitness_prompt(const std::string& expression,
                             const std::vector<double>& outputs,
                             const std::vector<double>& targets) const;

 private:
  std::vector<std::string> sample_subset(const std::vector<std::string>& samples,
                                         Rng& rng) const;
  // Best (lowest fitness) genotypes, up to n_shots.
  std::vector<std::string> best_of(const std::vector<std::pair<std::string, double>>& inds,
                                   bool sorted_all = false) const;

  const TemplateCatalog& catalog_;
  const ProblemEnv& env_;
};

// ---------------------------------------------------------------------------
// Response formatting

// Check step of the three-step protocol. Total functions: any content is
// accepted and classified, never thrown from.
template <class T>
struct FormatResult {
  std::optional<T> value;
  ErrorClass error = ErrorClass::None;
  bool ok() const { return error == ErrorClass::None; }
};

FormatResult<std::string> parse_expression_response(const std::string& content);
FormatResult<std::string> parse_mutation_response(const std::string& content);
FormatResult<std::vector<std::string>> parse_crossover_response(const std::string& content);
FormatResult<std::vector<std::string>> parse_individuals_response(const std::string& content);
FormatResult<std::vector<double>> parse_outputs_response(const std::string& content);
FormatResult<double> parse_fitness_response(const std::string& content);

// Convenience form mirroring the mutation formatter's fallback contract:
// any decode failure returns the input expression unchanged.
std::string format_response_rephrase_mutation(const std::string& content,
                                              const std::string& fallback_expression,
                                              ErrorClass* error = nullptr);

// ---------------------------------------------------------------------------
// Fixed phrases the generative mock keys on to recognize prompt families.
namespace prompt_markers {
inline constexpr const char* kInit = "Generate a mathematical expression";
inline constexpr const char* kMutation = "Rephrase the mathematical expression ";
inline constexpr const char* kMutationTail = " into a new mathematical expression.";
inline constexpr const char* kCrossover = "Recombine the mathematical expressions ";
inline constexpr const char* kCrossoverTail = " and create ";
inline constexpr const char* kSelect = "Select ";
inline constexpr const char* kSelectTail = " elements of high quality from the following list: ";
inline constexpr const char* kSort = "Order the elements of the following list: ";
inline constexpr const char* kEvaluation =
    "Provide the output from the evaluation of the mathematical expression ";
inline constexpr const char* kEvaluationTail = " on the following list of variables: ";
inline constexpr const char* kFitness =
    "Provide a numerical quality score based on the list of outputs from expression ";
inline constexpr const char* kResponseFormat = "\n\nProvide no additional text in response.";
}  // namespace prompt_markers

}  // namespace llmgp
