#include "geomlab/expr.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace geomlab;

TEST(Parse, PrecedenceAddMul) {
  // x1 + 2*x2 parses as Add(x1, Mul(2, x2)).
  Expression e = Expression::parse("x1 + 2*x2", 2);
  const ExprNode& root = *e.root();
  ASSERT_EQ(root.kind, NodeKind::Binary);
  EXPECT_EQ(root.op, BinaryOp::Add);
  EXPECT_EQ(root.lhs->kind, NodeKind::Variable);
  ASSERT_EQ(root.rhs->kind, NodeKind::Binary);
  EXPECT_EQ(root.rhs->op, BinaryOp::Mul);
}

TEST(Parse, MulBindsTighterThanAdd) {
  // x1+x2*x3 is Add(x1, Mul(x2,x3)), never Mul(Add(x1,x2),x3).
  Expression e = Expression::parse("x1+x2*x3", 3);
  const ExprNode& root = *e.root();
  ASSERT_EQ(root.kind, NodeKind::Binary);
  EXPECT_EQ(root.op, BinaryOp::Add);
  ASSERT_EQ(root.rhs->kind, NodeKind::Binary);
  EXPECT_EQ(root.rhs->op, BinaryOp::Mul);
  EXPECT_EQ(root.rhs->lhs->var, 1);
  EXPECT_EQ(root.rhs->rhs->var, 2);
}

TEST(Parse, PowRightAssociative) {
  Expression e = Expression::parse("2^3^2", 1);
  const ExprNode& root = *e.root();
  ASSERT_EQ(root.op, BinaryOp::Pow);
  EXPECT_EQ(root.lhs->kind, NodeKind::Number);
  ASSERT_EQ(root.rhs->kind, NodeKind::Binary);
  EXPECT_EQ(root.rhs->op, BinaryOp::Pow);
}

TEST(Parse, PowBindsTighterThanUnaryMinus) {
  // -x1^2 == -(x1^2)
  Expression e = Expression::parse("-x1^2", 1);
  ASSERT_EQ(e.root()->kind, NodeKind::Negate);
  EXPECT_EQ(e.root()->lhs->op, BinaryOp::Pow);
  // x1^-2 parses with a negated exponent.
  Expression f = Expression::parse("x1^-2", 1);
  ASSERT_EQ(f.root()->op, BinaryOp::Pow);
  EXPECT_EQ(f.root()->rhs->kind, NodeKind::Negate);
}

TEST(Parse, SubLeftAssociative) {
  // 1-2-3 == (1-2)-3
  Expression e = Expression::parse("1-2-3", 1);
  const ExprNode& root = *e.root();
  ASSERT_EQ(root.op, BinaryOp::Sub);
  EXPECT_EQ(root.rhs->number, 3.0);
  EXPECT_EQ(root.lhs->op, BinaryOp::Sub);
}

TEST(Parse, ErrorOffsetForTruncatedCall) {
  // "exp(" must report offset 4, "expected expression".
  try {
    Expression::parse("exp(", 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.offset, 4u);
    EXPECT_NE(std::string(err.what()).find("expected expression"), std::string::npos);
  }
}

TEST(Parse, VariableIndexOutOfRange) {
  try {
    Expression::parse("x1 + x4", 3);
    FAIL() << "expected ParseError";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.offset, 5u);
    EXPECT_NE(std::string(err.what()).find("out of range"), std::string::npos);
  }
}

TEST(Parse, UnknownFunction) {
  EXPECT_THROW(Expression::parse("tanh(x1)", 1), ParseError);
  EXPECT_THROW(Expression::parse("exp", 1), ParseError);  // missing '('
}

TEST(Parse, ParametersAndFunctions) {
  Expression e = Expression::parse("m*exp(x1) + sqrt(r)", 1);
  EXPECT_EQ(e.dimension(), 1);
  EXPECT_EQ(e.root()->kind, NodeKind::Binary);
}

TEST(Parse, EmptyAndTrailing) {
  EXPECT_THROW(Expression::parse("", 1), ParseError);
  EXPECT_THROW(Expression::parse("x1 x2", 2), ParseError);
  EXPECT_THROW(Expression::parse("(x1", 1), ParseError);
  EXPECT_THROW(Expression::parse("x1 +", 1), ParseError);
}

// ---------------------------------------------------------------------------
// Round-trip property: parse -> print -> parse yields an identical tree.

namespace {

bool same_tree(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Number: return a->number == b->number;
    case NodeKind::Variable: return a->var == b->var;
    case NodeKind::Parameter: return a->param == b->param;
    case NodeKind::Negate: return same_tree(a->lhs, b->lhs);
    case NodeKind::Call: return a->func == b->func && same_tree(a->lhs, b->lhs);
    case NodeKind::Binary:
      return a->op == b->op && same_tree(a->lhs, b->lhs) && same_tree(a->rhs, b->rhs);
  }
  return false;
}

// Random AST generator for fuzzing; depth-bounded.
ExprPtr random_ast(std::mt19937& rng, int depth, int dim) {
  std::uniform_int_distribution<int> leaf(0, 2);
  std::uniform_real_distribution<double> val(-4.0, 4.0);
  if (depth <= 0 || std::uniform_int_distribution<int>(0, 4)(rng) == 0) {
    switch (leaf(rng)) {
      case 0: return ast::num(std::round(val(rng) * 16.0) / 16.0);
      case 1: return ast::var(std::uniform_int_distribution<int>(0, dim - 1)(rng));
      default: return ast::param(std::uniform_int_distribution<int>(0, 1)(rng) ? "a" : "b");
    }
  }
  switch (std::uniform_int_distribution<int>(0, 7)(rng)) {
    case 0: return ast::add(random_ast(rng, depth - 1, dim), random_ast(rng, depth - 1, dim));
    case 1: return ast::sub(random_ast(rng, depth - 1, dim), random_ast(rng, depth - 1, dim));
    case 2: return ast::mul(random_ast(rng, depth - 1, dim), random_ast(rng, depth - 1, dim));
    case 3: return ast::div(random_ast(rng, depth - 1, dim), random_ast(rng, depth - 1, dim));
    case 4: return ast::pow(random_ast(rng, depth - 1, dim),
                            ast::num(std::uniform_int_distribution<int>(0, 3)(rng)));
    case 5: return ast::neg(random_ast(rng, depth - 1, dim));
    case 6: {
      FuncId f = static_cast<FuncId>(std::uniform_int_distribution<int>(0, 4)(rng));
      return ast::call(f, random_ast(rng, depth - 1, dim));
    }
    default:
      return ast::pow(random_ast(rng, depth - 1, dim), random_ast(rng, depth - 1, dim));
  }
}

}  // namespace

TEST(Parse, RoundTripProperty) {
  std::mt19937 rng(20240811);
  for (int iter = 0; iter < 400; ++iter) {
    ExprPtr tree = random_ast(rng, 5, 3);
    Expression printed = ast::finish(tree, 3);
    ASSERT_TRUE(same_tree(tree, printed.root())) << printed.str();
    Expression again = Expression::parse(printed.str(), 3);
    ASSERT_TRUE(same_tree(printed.root(), again.root())) << printed.str();
    EXPECT_EQ(printed.str(), again.str());
  }
}

TEST(Parse, FuzzInvalidNeverCrashes) {
  std::mt19937 rng(7);
  const std::string alphabet = "x123+-*/^()eps qlogrtcinm._";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(1, 24);
  int parsed = 0, rejected = 0;
  for (int iter = 0; iter < 3000; ++iter) {
    std::string s;
    const int L = len(rng);
    for (int i = 0; i < L; ++i) s += alphabet[pick(rng)];
    try {
      Expression e = Expression::parse(s, 3);
      ++parsed;
      Expression again = Expression::parse(e.str(), 3);
      EXPECT_EQ(e.str(), again.str());
    } catch (const ParseError& err) {
      ++rejected;
      EXPECT_LE(err.offset, s.size());
    }
  }
  EXPECT_GT(parsed, 0);
  EXPECT_GT(rejected, 0);
}

TEST(Substitute, RadialSubstitution) {
  // phi(s) = 1/s, substitute s -> sqrt(x1^2+x2^2+x3^2).
  Expression phi = Expression::parse("1/x1", 1);
  Expression radius = Expression::parse("sqrt(x1^2 + x2^2 + x3^2)", 3);
  Expression sub = phi.substitute({radius});
  EXPECT_EQ(sub.dimension(), 3);
  EXPECT_NE(sub.str().find("sqrt"), std::string::npos);
}
