#include "llmgp/expr.hpp"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace llmgp {
namespace {

// Deliberately different from the production evaluator: switch-free,
// string-compare driven, no error handling beyond asserts. Used as the
// independent oracle.
double oracle_eval(const Expr& e, double x0, double x1) {
  if (e.children.empty()) {
    if (e.node.symbol == "x0") return x0;
    if (e.node.symbol == "x1") return x1;
    return std::stod(e.node.symbol);
  }
  double a = oracle_eval(e.children[0], x0, x1);
  double b = oracle_eval(e.children[1], x0, x1);
  if (e.node.symbol == "+") return a + b;
  if (e.node.symbol == "-") return a - b;
  return a * b;
}

std::vector<Point> grid121() {
  std::vector<Point> pts;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j)
      pts.push_back({(i - 5) / 5.0, (j - 5) / 5.0});
  return pts;
}

class ExprTest : public ::testing::Test {
 protected:
  PrimitiveSet prims = PrimitiveSet::demo();
};

TEST_F(ExprTest, DemoPrimitiveSetOrderAndSplit) {
  std::vector<std::string> expected = {"*", "+", "-", "x0", "x1", "0", "1"};
  EXPECT_EQ(prims.symbols(), expected);
  ASSERT_EQ(prims.functions().size(), 3u);
  ASSERT_EQ(prims.terminals().size(), 4u);
  EXPECT_EQ(prims.find("x0")->arity, 0);
  EXPECT_EQ(prims.find("*")->arity, 2);
  EXPECT_EQ(prims.find("y"), nullptr);
}

TEST_F(ExprTest, ParsePrecedenceAndParentheses) {
  EXPECT_EQ(to_text(parse("x0 + x1 * x0", prims)), "(x0 + (x1 * x0))");
  EXPECT_EQ(to_text(parse("(x0 + x1) * x0", prims)), "((x0 + x1) * x0)");
  EXPECT_EQ(to_text(parse("x0 - x1 - 1", prims)), "((x0 - x1) - 1)");
  EXPECT_EQ(to_text(parse("x0 * x1 * 0", prims)), "((x0 * x1) * 0)");
  EXPECT_EQ(to_text(parse("x0", prims)), "x0");
  EXPECT_EQ(to_text(parse("((x1))", prims)), "x1");
  EXPECT_EQ(to_text(parse("x0+x1*1", prims)), "(x0 + (x1 * 1))");
}

TEST_F(ExprTest, ParseErrors) {
  ParseErrorKind kind;
  EXPECT_FALSE(try_parse("x0 + y", prims, &kind));
  EXPECT_EQ(kind, ParseErrorKind::UnknownSymbol);
  EXPECT_FALSE(try_parse("x2", prims, &kind));
  EXPECT_EQ(kind, ParseErrorKind::UnknownSymbol);
  EXPECT_FALSE(try_parse("2", prims, &kind));  // numeral outside the set
  EXPECT_EQ(kind, ParseErrorKind::UnknownSymbol);

  EXPECT_FALSE(try_parse("", prims, &kind));
  EXPECT_EQ(kind, ParseErrorKind::SyntaxError);
  EXPECT_FALSE(try_parse("x0 +", prims, &kind));
  EXPECT_EQ(kind, ParseErrorKind::SyntaxError);
  EXPECT_FALSE(try_parse("(x0 + x1", prims, &kind));
  EXPECT_EQ(kind, ParseErrorKind::SyntaxError);
  EXPECT_FALSE(try_parse("x0 x1", prims, &kind));
  EXPECT_EQ(kind, ParseErrorKind::SyntaxError);
  EXPECT_FALSE(try_parse("x0)", prims, &kind));
  EXPECT_EQ(kind, ParseErrorKind::SyntaxError);
  EXPECT_FALSE(try_parse("* x0 x1", prims, &kind));
  EXPECT_EQ(kind, ParseErrorKind::SyntaxError);

  EXPECT_THROW(parse("x0 + y", prims), ParseError);
  try {
    parse("x0 @ x1", prims);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::SyntaxError);
  }
}

TEST_F(ExprTest, RoundTripOnRandomTrees) {
  Rng rng(101);
  for (int i = 0; i < 500; ++i) {
    Expr t = random_tree(i % 2 ? GrowMethod::grow : GrowMethod::full, 1 + i % 5, prims,
                         rng);
    std::string text = to_text(t);
    Expr back = parse(text, prims);
    EXPECT_TRUE(equal(t, back)) << text;
    EXPECT_EQ(to_text(back), text);
  }
}

TEST_F(ExprTest, SizeAndDepth) {
  EXPECT_EQ(size(parse("x0", prims)), 1);
  EXPECT_EQ(depth(parse("x0", prims)), 0);
  Expr e = parse("(x0 + x1) * (x0 - 1)", prims);
  EXPECT_EQ(size(e), 7);
  EXPECT_EQ(depth(e), 2);
  EXPECT_EQ(depth(parse("x0 + x1 * (1 - 0)", prims)), 3);
}

TEST_F(ExprTest, EvaluateMatchesOracleEverywhere) {
  auto pts = grid121();
  Rng rng(4242);
  for (int i = 0; i < 1000; ++i) {
    Expr t = random_tree(i % 2 ? GrowMethod::grow : GrowMethod::full, 1 + i % 5, prims,
                         rng);
    for (const auto& p : pts)
      ASSERT_EQ(evaluate(t, p), oracle_eval(t, p.x0, p.x1)) << to_text(t);
  }
}

TEST_F(ExprTest, RandomTreeShapes) {
  Rng rng(7);
  for (int d = 1; d <= 5; ++d) {
    Expr full = random_tree(GrowMethod::full, d, prims, rng);
    EXPECT_EQ(depth(full), d);
    EXPECT_EQ(full.node.arity, 2);
    Expr grow = random_tree(GrowMethod::grow, d, prims, rng);
    EXPECT_LE(depth(grow), d);
    EXPECT_EQ(grow.node.arity, 2);  // root is a function when depth allows
  }
  Expr leaf = random_tree(GrowMethod::grow, 0, prims, rng);
  EXPECT_EQ(depth(leaf), 0);
  EXPECT_EQ(leaf.node.arity, 0);
}

TEST_F(ExprTest, RandomTreeIsDeterministicPerSeed) {
  Rng a(55), b(55);
  for (int i = 0; i < 50; ++i) {
    Expr ta = random_tree(GrowMethod::grow, 4, prims, a);
    Expr tb = random_tree(GrowMethod::grow, 4, prims, b);
    EXPECT_TRUE(equal(ta, tb));
  }
}

TEST_F(ExprTest, RampedHalfAndHalfCyclesDepths) {
  Rng rng(11);
  auto pop = ramped_half_and_half(10, 5, prims, rng);
  ASSERT_EQ(pop.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    int budget = 1 + i % 5;
    EXPECT_LE(depth(pop[i]), budget) << i;
    EXPECT_GE(depth(pop[i]), 1) << i;
    if (i % 2 == 0) EXPECT_EQ(depth(pop[i]), budget) << "full tree at slot " << i;
  }
}

TEST_F(ExprTest, SubtreeMutationRespectsDepthBound) {
  Rng rng(909);
  int changed = 0;
  for (int i = 0; i < 500; ++i) {
    Expr t = random_tree(GrowMethod::full, 5, prims, rng);
    Expr m = subtree_mutation(t, 5, prims, rng);
    EXPECT_LE(depth(m), 5);
    if (!equal(t, m)) ++changed;
  }
  EXPECT_GT(changed, 250);  // mutation is not a no-op in the common case
}

TEST_F(ExprTest, SubtreeCrossoverRespectsDepthBound) {
  Rng rng(910);
  for (int i = 0; i < 500; ++i) {
    Expr a = random_tree(GrowMethod::full, 5, prims, rng);
    Expr b = random_tree(GrowMethod::grow, 5, prims, rng);
    auto [c1, c2] = subtree_crossover(a, b, 5, rng);
    EXPECT_LE(depth(c1), 5);
    EXPECT_LE(depth(c2), 5);
  }
}

TEST_F(ExprTest, CrossoverDepthViolationFallsBackToParentCopy) {
  // Depth bound 1 admits no swap that grows either child, so any swap of
  // unequal-depth subtrees bounces back to the parent.
  Rng rng(3);
  Expr a = parse("x0 + x1", prims);
  Expr b = parse("(x0 + x1) * (x0 - x1)", prims);
  for (int i = 0; i < 100; ++i) {
    auto [c1, c2] = subtree_crossover(a, b, 1, rng);
    EXPECT_LE(depth(c1), 1);
    if (depth(c2) > 2) FAIL() << "child 2 exceeded its own parent depth";
  }
}

TEST_F(ExprTest, SimplifyRewriteTable) {
  auto simp = [&](const char* text) { return to_text(simplify(parse(text, prims))); };
  EXPECT_EQ(simp("x0 + 0"), "x0");
  EXPECT_EQ(simp("0 + x0"), "x0");
  EXPECT_EQ(simp("x1 - 0"), "x1");
  EXPECT_EQ(simp("x0 * 1"), "x0");
  EXPECT_EQ(simp("1 * x1"), "x1");
  EXPECT_EQ(simp("x0 * 0"), "0");
  EXPECT_EQ(simp("0 * x1"), "0");
  EXPECT_EQ(simp("x0 - x0"), "0");
  EXPECT_EQ(simp("(x0 + x1) - (x0 + x1)"), "0");
  EXPECT_EQ(simp("1 - 1"), "0");
  EXPECT_EQ(simp("1 * 1"), "1");
  EXPECT_EQ(simp("0 + 1"), "1");
  EXPECT_EQ(simp("1 + 1"), "(1 + 1)");  // 2 is outside the terminal set
  EXPECT_EQ(simp("(x0 * x1) + (1 - 0)"), "((x0 * x1) + 1)");
  EXPECT_EQ(simp("x0 + x1 * (1 - 0)"), "(x0 + x1)");
  EXPECT_EQ(simp("(x0 + 0) * (1 * x1)"), "(x0 * x1)");
  EXPECT_EQ(simp("x0 * (x1 - x1)"), "0");  // rule cascade reaches a fixpoint
}

TEST_F(ExprTest, SimplifyIsSoundAndIdempotent) {
  auto pts = grid121();
  Rng rng(616);
  for (int i = 0; i < 1000; ++i) {
    Expr t = random_tree(i % 2 ? GrowMethod::grow : GrowMethod::full, 1 + i % 5, prims,
                         rng);
    Expr s = simplify(t);
    for (const auto& p : pts)
      ASSERT_EQ(evaluate(t, p), evaluate(s, p)) << to_text(t) << " vs " << to_text(s);
    EXPECT_TRUE(equal(simplify(s), s)) << to_text(s);
    EXPECT_LE(size(s), size(t));
  }
}

}  // namespace
}  // namespace llmgp
