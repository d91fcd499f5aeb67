#include "llmgp/prompts.hpp"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace llmgp {
namespace {

class PromptTest : public ::testing::Test {
 protected:
  PromptTest() : rng(1), env(make_test_env()), catalog(TemplateCatalog::defaults()),
                 formulator(catalog, env) {}

  static ProblemEnv make_test_env() {
    Rng r(5);
    return make_env(10, 2, r);
  }

  Rng rng;
  ProblemEnv env;
  TemplateCatalog catalog;
  PromptFormulator formulator;
};

TEST_F(PromptTest, GoldenRephraseMutationPrompt) {
  const std::vector<std::string> samples = {"((x0 + x1) * (x0 - x1) + 1)",
                                            "x0 + x1 * (1 - 0)"};
  const std::string expected =
      "2 examples of mathematical expressions are: "
      "['((x0 + x1) * (x0 - x1) + 1)', 'x0 + x1 * (1 - 0)']\n\n"
      "Rephrase the mathematical expression (x0 * x1) + (1 - 0) into a new "
      "mathematical expression. "
      "Use the listed symbols ['*', '+', '-', 'x0', 'x1', '0', '1'].\n\n"
      "Provide no additional text in response. "
      "Format output in JSON as {\"new_expression\": \"<new expression>\"}";
  std::string got = formulator.mutation_prompt("(x0 * x1) + (1 - 0)", samples, rng);
  EXPECT_EQ(got, expected);
}

TEST_F(PromptTest, GoldenRephraseMutationResponse) {
  ErrorClass error = ErrorClass::ServiceError;
  std::string out = format_response_rephrase_mutation(
      "{\"new_expression\": \"(x0 * x1) + 1\"}", "(x0 * x1) + (1 - 0)", &error);
  EXPECT_EQ(out, "(x0 * x1) + 1");
  EXPECT_EQ(error, ErrorClass::None);
}

TEST_F(PromptTest, RephraseMutationResponseFallbacks) {
  ErrorClass error;
  EXPECT_EQ(format_response_rephrase_mutation("not json at all", "fb", &error), "fb");
  EXPECT_EQ(error, ErrorClass::JSONDecode);
  EXPECT_EQ(format_response_rephrase_mutation("{\"expression\": \"x0\"}", "fb", &error),
            "fb");
  EXPECT_EQ(error, ErrorClass::MissingKey);
  EXPECT_EQ(format_response_rephrase_mutation("{\"new_expression\": 17}", "fb", &error),
            "fb");
  EXPECT_EQ(error, ErrorClass::TypeError);
  EXPECT_EQ(format_response_rephrase_mutation("[1, 2]", "fb", &error), "fb");
  EXPECT_EQ(error, ErrorClass::TypeError);
  EXPECT_EQ(format_response_rephrase_mutation("", "fb", &error), "fb");
  EXPECT_EQ(error, ErrorClass::JSONDecode);
}

TEST_F(PromptTest, InitPromptShape) {
  std::string p = formulator.init_prompt();
  EXPECT_EQ(p.rfind(prompt_markers::kInit, 0), 0u) << p;
  EXPECT_NE(p.find("'x0': "), std::string::npos);
  EXPECT_NE(p.find("'y': "), std::string::npos);
  EXPECT_NE(p.find("Use the operators: ['*', '+', '-', 'x0', 'x1', '0', '1']"),
            std::string::npos);
  EXPECT_NE(p.find("Provide no additional text in response."), std::string::npos);
  EXPECT_NE(p.find("{\"expression\": \"<expression>\"}"), std::string::npos);
  EXPECT_EQ(formulator.direct_prompt(), p) << "direct reuses the generation template";
}

TEST_F(PromptTest, NumberAndFitnessFormatting) {
  EXPECT_EQ(format_number(2.0), "2.0");
  EXPECT_EQ(format_number(-1.0), "-1.0");
  EXPECT_EQ(format_number(0.0), "0.0");
  EXPECT_EQ(format_number(1.64), "1.64");
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_fitness(1e12), "1e+12");
  EXPECT_EQ(format_fitness(0.20752941), "0.2075");
  EXPECT_EQ(format_fitness(2.0), "2");
}

TEST_F(PromptTest, PythonListRendering) {
  EXPECT_EQ(python_list({}), "[]");
  EXPECT_EQ(python_list({"a"}), "['a']");
  EXPECT_EQ(python_list({"x0", "x1 + 1"}), "['x0', 'x1 + 1']");
  EXPECT_EQ(python_list_numbers({1.0, 0.25}), "[1.0, 0.25]");

  auto back = parse_python_list("['x0', 'x1 + 1']");
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, (std::vector<std::string>{"x0", "x1 + 1"}));
  EXPECT_FALSE(parse_python_list("nope").has_value());
  auto empty = parse_python_list("[]");
  ASSERT_TRUE(empty.has_value());
  EXPECT_TRUE(empty->empty());
}

TEST_F(PromptTest, RenderIndividualsAndTemplates) {
  EXPECT_EQ(render_individuals({{"x0", 0.5}, {"x1", 1e12}}), "x0 : 0.5\nx1 : 1e+12");

  EXPECT_EQ(render_template("a {b} c", {{"b", "B"}}), "a B c");
  EXPECT_EQ(render_template("{{literal}} {v}", {{"v", "x"}}), "{literal} x");
  EXPECT_THROW(render_template("{missing}", {}), TemplateError);
  EXPECT_THROW(render_template("{unterminated", {}), TemplateError);
  EXPECT_THROW(render_template("stray } here", {}), TemplateError);
}

TEST_F(PromptTest, FewShotSamplingKeepsSourceOrderAndIsBounded) {
  std::vector<std::string> samples = {"s0", "s1", "s2", "s3", "s4"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string p = formulator.mutation_prompt("x0", samples, rng);
    auto open = p.find('[');
    auto close = p.find(']');
    ASSERT_NE(open, std::string::npos);
    auto rendered = parse_python_list(p.substr(open, close - open + 1));
    ASSERT_TRUE(rendered.has_value());
    ASSERT_EQ(rendered->size(), 2u) << "n_shots = 2";
    int last = -1;
    for (const auto& s : *rendered) {
      int idx = s[1] - '0';
      EXPECT_GT(idx, last) << "source order must be preserved";
      last = idx;
    }
  }
}

TEST_F(PromptTest, SelectionAndReplacementPrompts) {
  std::vector<std::pair<std::string, double>> inds = {
      {"x0", 0.5}, {"x1", 2.0}, {"(x0 + x1)", 1e12}};
  std::string sel = formulator.selection_prompt(inds, 2);
  EXPECT_NE(sel.find("Select 2 elements of high quality from the following list: "),
            std::string::npos);
  EXPECT_NE(sel.find("x0 : 0.5"), std::string::npos);
  EXPECT_NE(sel.find("(x0 + x1) : 1e+12"), std::string::npos);
  EXPECT_NE(sel.find("{\"individuals\""), std::string::npos);

  std::string rep = formulator.replacement_prompt(inds, 3);
  EXPECT_NE(rep.find("Select 3 elements"), std::string::npos)
      << "replacement reuses the selection wording";

  std::string sort = formulator.sort_prompt(inds);
  EXPECT_NE(sort.find(prompt_markers::kSort), std::string::npos);
  EXPECT_NE(sort.find("x1 : 2"), std::string::npos);
}

TEST_F(PromptTest, CrossoverPromptShape) {
  Rng r(2);
  std::string p = formulator.crossover_prompt("x0", "(x1 + 1)", 2, {"x0", "x1"}, r);
  EXPECT_NE(p.find("Recombine the mathematical expressions "), std::string::npos);
  EXPECT_NE(p.find("x0"), std::string::npos);
  EXPECT_NE(p.find("(x1 + 1)"), std::string::npos);
  EXPECT_NE(p.find(" and create 2 new expressions from the terms"), std::string::npos);
  EXPECT_NE(p.find("{\"expressions\""), std::string::npos);
}

TEST_F(PromptTest, EvaluationAndFitnessPrompts) {
  std::vector<Point> pts = {{-1.0, 0.5}, {0.0, 1.0}};
  std::string ev = formulator.evaluation_prompt("(x0 + x1)", pts);
  EXPECT_NE(ev.find(prompt_markers::kEvaluation), std::string::npos);
  EXPECT_NE(ev.find("'x0': -1.0, 'x1': 0.5"), std::string::npos);
  EXPECT_EQ(ev.find("'y'"), std::string::npos) << "evaluation points carry no targets";
  EXPECT_NE(ev.find("{\"outputs\""), std::string::npos);

  std::string fit = formulator.fitness_prompt("(x0 + x1)", {0.5, 1.0}, {1.25, 1.0});
  EXPECT_NE(fit.find(prompt_markers::kFitness), std::string::npos);
  EXPECT_NE(fit.find("[0.5, 1.0]"), std::string::npos);
  EXPECT_NE(fit.find("[1.25, 1.0]"), std::string::npos);
  EXPECT_NE(fit.find("{\"fitness\""), std::string::npos);
}

TEST_F(PromptTest, ResponseParsersHappyPaths) {
  auto e = parse_expression_response("{\"expression\": \"x0 + 1\"}");
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.value, "x0 + 1");

  auto xo = parse_crossover_response("{\"expressions\": [\"x0\", \"x1\"]}");
  ASSERT_TRUE(xo.ok());
  EXPECT_EQ(xo.value->size(), 2u);

  auto inds = parse_individuals_response("{\"individuals\": [\"x0\"]}");
  ASSERT_TRUE(inds.ok());
  EXPECT_EQ(inds.value->front(), "x0");

  auto outs = parse_outputs_response("{\"outputs\": [1, 2.5, \"3.5\"]}");
  ASSERT_TRUE(outs.ok());
  EXPECT_EQ(*outs.value, (std::vector<double>{1.0, 2.5, 3.5}));

  auto fit = parse_fitness_response("{\"fitness\": 0.25}");
  ASSERT_TRUE(fit.ok());
  EXPECT_DOUBLE_EQ(*fit.value, 0.25);
  auto fit_str = parse_fitness_response("{\"fitness\": \"0.25\"}");
  ASSERT_TRUE(fit_str.ok());
  EXPECT_DOUBLE_EQ(*fit_str.value, 0.25);
}

TEST_F(PromptTest, ResponseParsersClassifyFailures) {
  EXPECT_EQ(parse_expression_response("garbage").error, ErrorClass::JSONDecode);
  EXPECT_EQ(parse_expression_response("[]").error, ErrorClass::TypeError);
  EXPECT_EQ(parse_expression_response("{}").error, ErrorClass::MissingKey);
  EXPECT_EQ(parse_expression_response("{\"expression\": []}").error,
            ErrorClass::TypeError);
  EXPECT_EQ(parse_crossover_response("{\"expressions\": \"x0\"}").error,
            ErrorClass::TypeError);
  EXPECT_EQ(parse_crossover_response("{\"expressions\": [1]}").error,
            ErrorClass::TypeError);
  EXPECT_EQ(parse_outputs_response("{\"outputs\": [\"abc\"]}").error,
            ErrorClass::TypeError);
  EXPECT_EQ(parse_fitness_response("{\"fitness\": \"abc\"}").error, ErrorClass::TypeError);
  EXPECT_EQ(parse_fitness_response("{\"score\": 1}").error, ErrorClass::MissingKey);
}

TEST_F(PromptTest, ResponseParsersAreTotalOnNoise) {
  Rng noise(33);
  const std::string alphabet = "{}[]\":,x01+-* \n\\\"ey";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    int len = static_cast<int>(rand_below(noise, 40));
    for (int j = 0; j < len; ++j)
      s += alphabet[rand_below(noise, alphabet.size())];
    auto a = parse_expression_response(s);
    auto b = parse_crossover_response(s);
    auto c = parse_individuals_response(s);
    auto d = parse_outputs_response(s);
    auto e = parse_fitness_response(s);
    if (!a.ok()) EXPECT_FALSE(a.value.has_value());
    if (!e.ok()) EXPECT_FALSE(e.value.has_value());
    (void)b;
    (void)c;
    (void)d;
  }
}

TEST_F(PromptTest, CatalogDefaultsCoverAllOperators) {
  const char* ops[] = {"init",      "direct_llm",  "rephrase_mutation",
                       "crossover", "selection",   "replacement",
                       "sort_population", "evaluation", "fitness_measure"};
  for (const char* op : ops) EXPECT_FALSE(catalog.body(op).empty()) << op;
  EXPECT_THROW(catalog.body("nonexistent"), TemplateError);
  EXPECT_EQ(catalog.body("selection"), catalog.body("replacement"));
}

TEST_F(PromptTest, CatalogFileRoundTrip) {
  std::string path = testing::TempDir() + "catalog_roundtrip.txt";
  {
    std::ofstream out(path);
    out << "# comment line before the first header\n\n";
    for (const auto& [op, body] : catalog.all())
      out << "[" << op << "]\n" << body << "\n\n";
  }
  TemplateCatalog loaded = TemplateCatalog::load_file(path);
  for (const auto& [op, body] : catalog.all())
    EXPECT_EQ(loaded.body(op), body) << op;
  std::remove(path.c_str());
}

// The catalog shipped in prompts/ must stay in lockstep with the built-in
// templates; editing one without the other is a packaging bug.
TEST_F(PromptTest, ShippedCatalogFileMatchesBuiltInDefaults) {
  TemplateCatalog shipped = TemplateCatalog::load_file(LLMGP_REPO_CATALOG);
  ASSERT_EQ(shipped.all().size(), catalog.all().size());
  for (const auto& [op, body] : catalog.all()) EXPECT_EQ(shipped.body(op), body) << op;
}

TEST_F(PromptTest, CatalogFileOverridesTemplate) {
  std::string path = testing::TempDir() + "catalog_override.txt";
  {
    std::ofstream out(path);
    out << "[rephrase_mutation]\nTurn {expression} into something nicer.\n";
  }
  TemplateCatalog loaded = TemplateCatalog::load_file(path);
  PromptFormulator custom(loaded, env);
  Rng r(1);
  EXPECT_EQ(custom.mutation_prompt("x0 + 1", {}, r),
            "Turn x0 + 1 into something nicer.");
  // untouched operators keep their defaults
  EXPECT_EQ(loaded.body("init"), catalog.body("init"));
  std::remove(path.c_str());
}

}  // namespace
}  // namespace llmgp
