#pragma once

// Arithmetic expression language for scalar fields.
//
// Grammar (see docs/dsl.md):
//   additive       := multiplicative (('+' | '-') multiplicative)*
//   multiplicative := unary (('*' | '/') unary)*
//   unary          := '-' unary | power
//   power          := primary ('^' unary)?          (right associative)
//   primary        := number | ident | ident '(' additive ')' | '(' additive ')'
//
// Identifiers x1..xn are variables; exp, log, sqrt, sin, cos are the only
// functions; every other identifier is a named parameter bound at evaluation
// time. Expressions are immutable after parsing and safe to share across
// threads.

#include "geomlab/common.hpp"

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geomlab {

enum class NodeKind { Number, Variable, Parameter, Negate, Binary, Call };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class FuncId { Exp, Log, Sqrt, Sin, Cos };

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  double number = 0.0;   // Number
  int var = -1;          // Variable, zero-based
  std::string param;     // Parameter
  BinaryOp op{};         // Binary
  FuncId func{};         // Call
  ExprPtr lhs, rhs;      // children; Negate/Call use lhs only
  SourceSpan span;
};

inline const char* func_name(FuncId f) {
  switch (f) {
    case FuncId::Exp: return "exp";
    case FuncId::Log: return "log";
    case FuncId::Sqrt: return "sqrt";
    case FuncId::Sin: return "sin";
    case FuncId::Cos: return "cos";
  }
  return "?";
}

namespace detail {

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  TokKind kind;
  std::size_t begin, end;
  double number = 0.0;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_.begin = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = TokKind::End;
      tok_.end = pos_;
      return;
    }
    const char c = src_[pos_];
    auto single = [&](TokKind k) {
      tok_.kind = k;
      tok_.end = ++pos_;
    };
    switch (c) {
      case '+': single(TokKind::Plus); return;
      case '-': single(TokKind::Minus); return;
      case '*': single(TokKind::Star); return;
      case '/': single(TokKind::Slash); return;
      case '^': single(TokKind::Caret); return;
      case '(': single(TokKind::LParen); return;
      case ')': single(TokKind::RParen); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = TokKind::Ident;
      tok_.end = pos_;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' was the start of an identifier, not an exponent
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (text == ".") throw ParseError(start, "malformed number");
    tok_.kind = TokKind::Number;
    tok_.end = pos_;
    try {
      tok_.number = std::stod(text);
    } catch (const std::exception&) {
      throw ParseError(start, "malformed number '" + text + "'");
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_{};
};

}  // namespace detail

class Expression {
 public:
  Expression() = default;

  static Expression parse(std::string_view text, int dimension);

  // Constant expression, no parse step.
  static Expression constant(double value, int dimension) {
    auto node = std::make_shared<ExprNode>();
    node->kind = NodeKind::Number;
    node->number = value;
    Expression e;
    e.dim_ = dimension;
    e.root_ = std::move(node);
    e.source_ = e.str();
    return e;
  }

  int dimension() const { return dim_; }
  const ExprPtr& root() const { return root_; }
  const std::string& source() const { return source_; }
  bool empty() const { return root_ == nullptr; }

  // Canonical text form; parse(str()) reproduces the same AST.
  std::string str() const { return print(root_, 0); }

  static std::string print(const ExprPtr& n, int parent_level);

  // Source text of a sub-expression, for error reporting.
  std::string slice(const SourceSpan& s) const {
    if (s.end <= s.begin || s.end > source_.size()) return str();
    return source_.substr(s.begin, s.end - s.begin);
  }

  // Replace each variable x_{i+1} by replacements[i]; used for coordinate
  // changes (rotations, radial substitutions). The result is re-parsed from
  // its printed form so spans stay consistent.
  Expression substitute(const std::vector<Expression>& replacements) const;

 private:
  int dim_ = 0;
  std::string source_;
  ExprPtr root_;
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, int dim) : lex_(src), dim_(dim) {}

  ExprPtr run() {
    ExprPtr e = additive();
    const Token& t = lex_.peek();
    if (t.kind != TokKind::End)
      throw ParseError(t.begin, "unexpected trailing input");
    return e;
  }

 private:
  ExprPtr additive() {
    ExprPtr e = multiplicative();
    while (true) {
      const Token& t = lex_.peek();
      if (t.kind == TokKind::Plus || t.kind == TokKind::Minus) {
        BinaryOp op = t.kind == TokKind::Plus ? BinaryOp::Add : BinaryOp::Sub;
        lex_.take();
        e = binary(op, e, multiplicative());
      } else {
        return e;
      }
    }
  }

  ExprPtr multiplicative() {
    ExprPtr e = unary();
    while (true) {
      const Token& t = lex_.peek();
      if (t.kind == TokKind::Star || t.kind == TokKind::Slash) {
        BinaryOp op = t.kind == TokKind::Star ? BinaryOp::Mul : BinaryOp::Div;
        lex_.take();
        e = binary(op, e, unary());
      } else {
        return e;
      }
    }
  }

  ExprPtr unary() {
    const Token& t = lex_.peek();
    if (t.kind == TokKind::Minus) {
      Token minus = lex_.take();
      ExprPtr child = unary();
      auto node = std::make_shared<ExprNode>();
      node->kind = NodeKind::Negate;
      node->lhs = child;
      node->span = {minus.begin, child->span.end};
      return node;
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (lex_.peek().kind == TokKind::Caret) {
      lex_.take();
      ExprPtr expo = unary();  // right associative; binds tighter than unary minus
      return binary(BinaryOp::Pow, base, expo);
    }
    return base;
  }

  ExprPtr primary() {
    const Token t = lex_.take();
    switch (t.kind) {
      case TokKind::Number: {
        auto node = std::make_shared<ExprNode>();
        node->kind = NodeKind::Number;
        node->number = t.number;
        node->span = {t.begin, t.end};
        return node;
      }
      case TokKind::LParen: {
        ExprPtr inner = additive();
        expect_rparen(t.begin);
        return inner;
      }
      case TokKind::Ident:
        return ident(t);
      default:
        throw ParseError(t.begin, "expected expression");
    }
  }

  ExprPtr ident(const Token& t) {
    // Function call?
    FuncId fn{};
    bool is_fn = true;
    if (t.text == "exp") fn = FuncId::Exp;
    else if (t.text == "log") fn = FuncId::Log;
    else if (t.text == "sqrt") fn = FuncId::Sqrt;
    else if (t.text == "sin") fn = FuncId::Sin;
    else if (t.text == "cos") fn = FuncId::Cos;
    else is_fn = false;

    if (is_fn) {
      const Token& open = lex_.peek();
      if (open.kind != TokKind::LParen)
        throw ParseError(open.begin, "expected '(' after '" + t.text + "'");
      lex_.take();
      ExprPtr arg = additive();
      std::size_t close = expect_rparen(t.begin);
      auto node = std::make_shared<ExprNode>();
      node->kind = NodeKind::Call;
      node->func = fn;
      node->lhs = arg;
      node->span = {t.begin, close};
      return node;
    }

    if (t.text.size() >= 2 && t.text[0] == 'x' &&
        t.text.find_first_not_of("0123456789", 1) == std::string::npos) {
      long idx = std::stol(t.text.substr(1));
      if (idx < 1 || idx > dim_)
        throw ParseError(t.begin, "variable index out of range: " + t.text +
                                      " with dimension " + std::to_string(dim_));
      auto node = std::make_shared<ExprNode>();
      node->kind = NodeKind::Variable;
      node->var = static_cast<int>(idx - 1);
      node->span = {t.begin, t.end};
      return node;
    }

    if (lex_.peek().kind == TokKind::LParen)
      throw ParseError(t.begin, "unknown function '" + t.text + "'");

    auto node = std::make_shared<ExprNode>();
    node->kind = NodeKind::Parameter;
    node->param = t.text;
    node->span = {t.begin, t.end};
    return node;
  }

  std::size_t expect_rparen(std::size_t open_pos) {
    const Token& t = lex_.peek();
    if (t.kind != TokKind::RParen)
      throw ParseError(t.kind == TokKind::End ? t.begin : t.begin,
                       t.kind == TokKind::End ? "expected expression"
                                              : "expected ')' for '(' at offset " +
                                                    std::to_string(open_pos));
    return lex_.take().end;
  }

  ExprPtr binary(BinaryOp op, ExprPtr l, ExprPtr r) {
    auto node = std::make_shared<ExprNode>();
    node->kind = NodeKind::Binary;
    node->op = op;
    node->span = {l->span.begin, r->span.end};
    node->lhs = std::move(l);
    node->rhs = std::move(r);
    return node;
  }

  Lexer lex_;
  int dim_;
};

}  // namespace detail

inline Expression Expression::parse(std::string_view text, int dimension) {
  if (text.empty()) throw ParseError(0, "empty expression");
  if (dimension < 1 || dimension > kMaxDim)
    throw ParseError(0, "dimension must be between 1 and " + std::to_string(kMaxDim));
  detail::Parser parser(text, dimension);
  Expression e;
  e.dim_ = dimension;
  e.source_ = std::string(text);
  e.root_ = parser.run();
  return e;
}

inline std::string Expression::print(const ExprPtr& n, int parent_level) {
  if (!n) return "";
  // Precedence levels: additive 1, multiplicative 2, unary 3, power 4, atom 5.
  auto wrap = [&](const std::string& s, int level) {
    if (level < parent_level) return "(" + s + ")";
    return s;
  };
  switch (n->kind) {
    case NodeKind::Number: {
      const std::string s = format_double(n->number);
      // A leading minus would re-parse as unary negate; protect with parens.
      return (s[0] == '-') ? wrap(s, 0) : s;
    }
    case NodeKind::Variable:
      return "x" + std::to_string(n->var + 1);
    case NodeKind::Parameter:
      return n->param;
    case NodeKind::Negate:
      return wrap("-" + print(n->lhs, 3), 3);
    case NodeKind::Call:
      return std::string(func_name(n->func)) + "(" + print(n->lhs, 0) + ")";
    case NodeKind::Binary: {
      switch (n->op) {
        case BinaryOp::Add:
          return wrap(print(n->lhs, 1) + " + " + print(n->rhs, 2), 1);
        case BinaryOp::Sub:
          return wrap(print(n->lhs, 1) + " - " + print(n->rhs, 2), 1);
        case BinaryOp::Mul:
          return wrap(print(n->lhs, 2) + "*" + print(n->rhs, 3), 2);
        case BinaryOp::Div:
          return wrap(print(n->lhs, 2) + "/" + print(n->rhs, 3), 2);
        case BinaryOp::Pow:
          return wrap(print(n->lhs, 5) + "^" + print(n->rhs, 4), 4);
      }
      return "";
    }
  }
  return "";
}

// -----------------------------------------------------------------------------
// AST construction helpers (used by tests and by generated metrics).

namespace ast {

ExprPtr neg(ExprPtr c);

// Negative constants are normalized to Negate(Number): the grammar has no
// negative literals, so this keeps built trees inside the parseable set.
inline ExprPtr num(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Number;
  if (v == 0.0) v = 0.0;  // collapse -0.0
  if (v < 0.0) {
    n->number = -v;
    return neg(n);
  }
  n->number = v;
  return n;
}
inline ExprPtr var(int zero_based) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Variable;
  n->var = zero_based;
  return n;
}
inline ExprPtr param(std::string name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Parameter;
  n->param = std::move(name);
  return n;
}
inline ExprPtr bin(BinaryOp op, ExprPtr l, ExprPtr r) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}
inline ExprPtr add(ExprPtr l, ExprPtr r) { return bin(BinaryOp::Add, std::move(l), std::move(r)); }
inline ExprPtr sub(ExprPtr l, ExprPtr r) { return bin(BinaryOp::Sub, std::move(l), std::move(r)); }
inline ExprPtr mul(ExprPtr l, ExprPtr r) { return bin(BinaryOp::Mul, std::move(l), std::move(r)); }
inline ExprPtr div(ExprPtr l, ExprPtr r) { return bin(BinaryOp::Div, std::move(l), std::move(r)); }
inline ExprPtr pow(ExprPtr l, ExprPtr r) { return bin(BinaryOp::Pow, std::move(l), std::move(r)); }
inline ExprPtr neg(ExprPtr c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Negate;
  n->lhs = std::move(c);
  return n;
}
inline ExprPtr call(FuncId f, ExprPtr c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Call;
  n->func = f;
  n->lhs = std::move(c);
  return n;
}

// Wrap a raw AST into an Expression by printing and re-parsing, so spans and
// source text are consistent and variable ranges get validated.
Expression finish(const ExprPtr& root, int dimension);

inline ExprPtr clone_subst(const ExprPtr& n, const std::vector<ExprPtr>& repl) {
  if (!n) return nullptr;
  switch (n->kind) {
    case NodeKind::Variable:
      return repl[static_cast<std::size_t>(n->var)];
    case NodeKind::Number:
    case NodeKind::Parameter: {
      auto c = std::make_shared<ExprNode>(*n);
      return c;
    }
    case NodeKind::Negate:
      return neg(clone_subst(n->lhs, repl));
    case NodeKind::Call:
      return call(n->func, clone_subst(n->lhs, repl));
    case NodeKind::Binary:
      return bin(n->op, clone_subst(n->lhs, repl), clone_subst(n->rhs, repl));
  }
  return nullptr;
}

}  // namespace ast

inline Expression ast::finish(const ExprPtr& root, int dimension) {
  return Expression::parse(Expression::print(root, 0), dimension);
}

inline Expression Expression::substitute(const std::vector<Expression>& replacements) const {
  if (static_cast<int>(replacements.size()) != dim_)
    throw Error("substitute: need one replacement per variable");
  int new_dim = 0;
  std::vector<ExprPtr> roots;
  roots.reserve(replacements.size());
  for (const auto& r : replacements) {
    new_dim = std::max(new_dim, r.dimension());
    roots.push_back(r.root());
  }
  ExprPtr substituted = ast::clone_subst(root_, roots);
  return ast::finish(substituted, new_dim);
}

}  // namespace geomlab
