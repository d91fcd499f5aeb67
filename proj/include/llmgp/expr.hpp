#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "llmgp/rng.hpp"

namespace llmgp {

struct Primitive {
  std::string symbol;
  int arity = 0;

  bool operator==(const Primitive& o) const {
    return symbol == o.symbol && arity == o.arity;
  }
};

// Ordered collection of primitives. The order is the order symbols are
// listed when a prompt enumerates them, so it is part of the contract.
class PrimitiveSet {
 public:
  PrimitiveSet() = default;
  explicit PrimitiveSet(std::vector<Primitive> prims);

  // {*, +, -} over {x0, x1, 0, 1}
  static PrimitiveSet demo();

  const std::vector<Primitive>& all() const { return prims_; }
  const std::vector<Primitive>& functions() const { return functions_; }
  const std::vector<Primitive>& terminals() const { return terminals_; }
  const Primitive* find(const std::string& symbol) const;
  std::vector<std::string> symbols() const;

 private:
  std::vector<Primitive> prims_;
  std::vector<Primitive> functions_;
  std::vector<Primitive> terminals_;
};

struct Point {
  double x0 = 0.0;
  double x1 = 0.0;
};

// Expression tree with value semantics. A single node has depth 0.
struct Expr {
  Primitive node;
  std::vector<Expr> children;
};

enum class ParseErrorKind { SyntaxError, UnknownSymbol };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

// Infix grammar, '*' binding tighter than '+' and '-':
//
//   expr   := term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := terminal | '(' expr ')'
//
// Every token must name a primitive; anything else is UnknownSymbol.
Expr parse(const std::string& text, const PrimitiveSet& prims);
std::optional<Expr> try_parse(const std::string& text, const PrimitiveSet& prims,
                              ParseErrorKind* kind = nullptr);

// Infix rendering with explicit parentheses around every binary
// application; a lone terminal renders as its symbol.
std::string to_text(const Expr& e);

double evaluate(const Expr& e, const Point& p);

int size(const Expr& e);
int depth(const Expr& e);
bool equal(const Expr& a, const Expr& b);

enum class GrowMethod { full, grow };

// full: every leaf sits exactly at max_depth. grow: leaves may appear at
// any depth <= max_depth. The root is a function symbol whenever
// max_depth >= 1.
Expr random_tree(GrowMethod method, int max_depth, const PrimitiveSet& prims, Rng& rng);

// Classic ramped scheme: depth cycles over [1, max_depth] while the
// method alternates between full and grow.
std::vector<Expr> ramped_half_and_half(int n, int max_depth, const PrimitiveSet& prims,
                                       Rng& rng);

// Replaces one uniformly chosen node's subtree with a grow-generated
// subtree sized so the result stays within max_depth.
Expr subtree_mutation(const Expr& e, int max_depth, const PrimitiveSet& prims, Rng& rng);

// Swaps uniformly chosen subtrees. A child that would exceed max_depth is
// replaced by a copy of its corresponding parent.
std::pair<Expr, Expr> subtree_crossover(const Expr& a, const Expr& b, int max_depth,
                                        Rng& rng);

// Algebraic cleanup to a fixpoint: folds constant operations whose result
// stays in {0, 1} and applies
//   x+0 -> x   0+x -> x   x-0 -> x   x-x -> 0
//   x*1 -> x   1*x -> x   x*0 -> 0   0*x -> 0
// Every rule preserves the evaluated value.
Expr simplify(const Expr& e);

}  // namespace llmgp
