#include "llmgp/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace llmgp {

PrimitiveSet::PrimitiveSet(std::vector<Primitive> prims) : prims_(std::move(prims)) {
  for (const auto& p : prims_) {
    if (p.arity == 0)
      terminals_.push_back(p);
    else
      functions_.push_back(p);
  }
}

PrimitiveSet PrimitiveSet::demo() {
  return PrimitiveSet({{"*", 2},
                       {"+", 2},
                       {"-", 2},
                       {"x0", 0},
                       {"x1", 0},
                       {"0", 0},
                       {"1", 0}});
}

const Primitive* PrimitiveSet::find(const std::string& symbol) const {
  for (const auto& p : prims_)
    if (p.symbol == symbol) return &p;
  return nullptr;
}

std::vector<std::string> PrimitiveSet::symbols() const {
  std::vector<std::string> out;
  out.reserve(prims_.size());
  for (const auto& p : prims_) out.push_back(p.symbol);
  return out;
}

namespace {

struct Token {
  enum Kind { lparen, rparen, op, symbol, end } kind;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ >= text_.size()) return {Token::end, ""};
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      return {Token::lparen, "("};
    }
    if (c == ')') {
      ++pos_;
      return {Token::rparen, ")"};
    }
    if (c == '+' || c == '-' || c == '*') {
      ++pos_;
      return {Token::op, std::string(1, c)};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      return {Token::symbol, text_.substr(start, pos_ - start)};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '.') {
        ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      }
      return {Token::symbol, text_.substr(start, pos_ - start)};
    }
    throw ParseError(ParseErrorKind::SyntaxError,
                     std::string("unexpected character '") + c + "'");
  }

 private:
  const std::string& text_;
  size_t pos_ = 0;
};

class Parser {
 public:
  Parser(const std::string& text, const PrimitiveSet& prims)
      : lexer_(text), prims_(prims) {
    advance();
  }

  Expr run() {
    Expr e = parse_expr();
    if (cur_.kind != Token::end)
      throw ParseError(ParseErrorKind::SyntaxError,
                       "trailing input after expression: '" + cur_.text + "'");
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  Expr make_binary(const std::string& sym, Expr lhs, Expr rhs) {
    const Primitive* p = prims_.find(sym);
    if (!p || p->arity != 2)
      throw ParseError(ParseErrorKind::UnknownSymbol, "unknown symbol '" + sym + "'");
    Expr e{*p, {}};
    e.children.push_back(std::move(lhs));
    e.children.push_back(std::move(rhs));
    return e;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (cur_.kind == Token::op && (cur_.text == "+" || cur_.text == "-")) {
      std::string sym = cur_.text;
      advance();
      Expr rhs = parse_term();
      lhs = make_binary(sym, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    while (cur_.kind == Token::op && cur_.text == "*") {
      advance();
      Expr rhs = parse_factor();
      lhs = make_binary("*", std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_factor() {
    if (cur_.kind == Token::lparen) {
      advance();
      Expr e = parse_expr();
      if (cur_.kind != Token::rparen)
        throw ParseError(ParseErrorKind::SyntaxError, "expected ')'");
      advance();
      return e;
    }
    if (cur_.kind == Token::symbol) {
      std::string sym = cur_.text;
      const Primitive* p = prims_.find(sym);
      if (!p)
        throw ParseError(ParseErrorKind::UnknownSymbol, "unknown symbol '" + sym + "'");
      if (p->arity != 0)
        throw ParseError(ParseErrorKind::SyntaxError,
                         "symbol '" + sym + "' is not a terminal");
      advance();
      return Expr{*p, {}};
    }
    throw ParseError(ParseErrorKind::SyntaxError,
                     cur_.kind == Token::end ? "unexpected end of input"
                                             : "unexpected token '" + cur_.text + "'");
  }

  Lexer lexer_;
  const PrimitiveSet& prims_;
  Token cur_;
};

}  // namespace

Expr parse(const std::string& text, const PrimitiveSet& prims) {
  return Parser(text, prims).run();
}

std::optional<Expr> try_parse(const std::string& text, const PrimitiveSet& prims,
                              ParseErrorKind* kind) {
  try {
    return parse(text, prims);
  } catch (const ParseError& e) {
    if (kind) *kind = e.kind();
    return std::nullopt;
  }
}

std::string to_text(const Expr& e) {
  if (e.children.empty()) return e.node.symbol;
  if (e.children.size() == 2)
    return "(" + to_text(e.children[0]) + " " + e.node.symbol + " " +
           to_text(e.children[1]) + ")";
  std::string out = e.node.symbol + "(";
  for (size_t i = 0; i < e.children.size(); ++i) {
    if (i) out += ", ";
    out += to_text(e.children[i]);
  }
  return out + ")";
}

double evaluate(const Expr& e, const Point& p) {
  if (e.children.empty()) {
    const std::string& s = e.node.symbol;
    if (s == "x0") return p.x0;
    if (s == "x1") return p.x1;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end && *end == '\0' && end != s.c_str()) return v;
    throw std::logic_error("terminal '" + s + "' has no value binding");
  }
  const std::string& s = e.node.symbol;
  if (e.children.size() == 2) {
    double a = evaluate(e.children[0], p);
    double b = evaluate(e.children[1], p);
    if (s == "+") return a + b;
    if (s == "-") return a - b;
    if (s == "*") return a * b;
  }
  throw std::logic_error("function '" + s + "' has no evaluation rule");
}

int size(const Expr& e) {
  int n = 1;
  for (const auto& c : e.children) n += size(c);
  return n;
}

int depth(const Expr& e) {
  int d = 0;
  for (const auto& c : e.children) d = std::max(d, 1 + depth(c));
  return d;
}

bool equal(const Expr& a, const Expr& b) {
  if (!(a.node == b.node) || a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!equal(a.children[i], b.children[i])) return false;
  return true;
}

namespace {

const Primitive& pick(const std::vector<Primitive>& prims, Rng& rng) {
  return prims[rand_below(rng, prims.size())];
}

Expr random_tree_at(GrowMethod method, int remaining, bool at_root,
                    const PrimitiveSet& prims, Rng& rng) {
  if (remaining <= 0) return Expr{pick(prims.terminals(), rng), {}};
  const Primitive* chosen = nullptr;
  if (at_root || method == GrowMethod::full) {
    chosen = &pick(prims.functions(), rng);
  } else {
    chosen = &pick(prims.all(), rng);
    if (chosen->arity == 0) return Expr{*chosen, {}};
  }
  Expr e{*chosen, {}};
  for (int i = 0; i < chosen->arity; ++i)
    e.children.push_back(random_tree_at(method, remaining - 1, false, prims, rng));
  return e;
}

Expr* node_at(Expr& e, int index, int* counter, int* node_depth, int cur_depth) {
  if (*counter == index) {
    *node_depth = cur_depth;
    return &e;
  }
  for (auto& c : e.children) {
    ++*counter;
    if (Expr* found = node_at(c, index, counter, node_depth, cur_depth + 1)) return found;
  }
  return nullptr;
}

}  // namespace

Expr random_tree(GrowMethod method, int max_depth, const PrimitiveSet& prims, Rng& rng) {
  if (prims.terminals().empty())
    throw std::invalid_argument("primitive set has no terminals");
  if (max_depth >= 1 && prims.functions().empty())
    throw std::invalid_argument("primitive set has no functions");
  return random_tree_at(method, max_depth, max_depth >= 1, prims, rng);
}

std::vector<Expr> ramped_half_and_half(int n, int max_depth, const PrimitiveSet& prims,
                                       Rng& rng) {
  std::vector<Expr> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    int d = max_depth >= 1 ? 1 + (i % max_depth) : 0;
    GrowMethod m = (i % 2 == 0) ? GrowMethod::full : GrowMethod::grow;
    out.push_back(random_tree(m, d, prims, rng));
  }
  return out;
}

Expr subtree_mutation(const Expr& e, int max_depth, const PrimitiveSet& prims, Rng& rng) {
  Expr result = e;
  int index = static_cast<int>(rand_below(rng, size(e)));
  int counter = 0, node_depth = 0;
  Expr* target = node_at(result, index, &counter, &node_depth, 0);
  int budget = std::max(0, max_depth - node_depth);
  *target = random_tree(GrowMethod::grow, budget, prims, rng);
  return result;
}

std::pair<Expr, Expr> subtree_crossover(const Expr& a, const Expr& b, int max_depth,
                                        Rng& rng) {
  int ia = static_cast<int>(rand_below(rng, size(a)));
  int ib = static_cast<int>(rand_below(rng, size(b)));

  Expr child1 = a;
  Expr child2 = b;
  int counter = 0, d = 0;
  Expr* pa = node_at(child1, ia, &counter, &d, 0);
  counter = 0;
  Expr* pb = node_at(child2, ib, &counter, &d, 0);
  std::swap(*pa, *pb);

  if (depth(child1) > max_depth) child1 = a;
  if (depth(child2) > max_depth) child2 = b;
  return {std::move(child1), std::move(child2)};
}

namespace {

bool const_value(const Expr& e, double* out) {
  if (!e.children.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(e.node.symbol.c_str(), &end);
  if (!end || *end != '\0' || end == e.node.symbol.c_str()) return false;
  *out = v;
  return true;
}

bool is_const(const Expr& e, double v) {
  double got;
  return const_value(e, &got) && got == v;
}

Expr const_leaf(double v) {
  return Expr{Primitive{v == 0.0 ? "0" : "1", 0}, {}};
}

}  // namespace

Expr simplify(const Expr& e) {
  Expr r{e.node, {}};
  r.children.reserve(e.children.size());
  for (const auto& c : e.children) r.children.push_back(simplify(c));
  if (r.children.size() != 2) return r;

  // Each rewrite strictly shrinks the tree, so this loop terminates. The
  // children are already in simplified form, which makes one local pass
  // per rewrite sufficient. Children are moved out through a temporary
  // before being assigned over their parent.
  auto hoist = [&r](size_t child) {
    Expr tmp = std::move(r.children[child]);
    r = std::move(tmp);
  };
  for (;;) {
    if (r.children.size() != 2) break;
    const std::string& op = r.node.symbol;
    const Expr& a = r.children[0];
    const Expr& b = r.children[1];

    double va, vb;
    if (const_value(a, &va) && const_value(b, &vb)) {
      double v = op == "+" ? va + vb : op == "-" ? va - vb : op == "*" ? va * vb : NAN;
      if (v == 0.0 || v == 1.0) {
        r = const_leaf(v);
        continue;
      }
    }
    if (op == "+") {
      if (is_const(a, 0.0)) {
        hoist(1);
        continue;
      }
      if (is_const(b, 0.0)) {
        hoist(0);
        continue;
      }
    } else if (op == "-") {
      if (is_const(b, 0.0)) {
        hoist(0);
        continue;
      }
      if (equal(a, b)) {
        r = const_leaf(0.0);
        continue;
      }
    } else if (op == "*") {
      if (is_const(a, 0.0) || is_const(b, 0.0)) {
        r = const_leaf(0.0);
        continue;
      }
      if (is_const(a, 1.0)) {
        hoist(1);
        continue;
      }
      if (is_const(b, 1.0)) {
        hoist(0);
        continue;
      }
    }
    break;
  }
  return r;
}

}  // namespace llmgp
