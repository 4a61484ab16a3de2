#pragma once

// Second-order forward-mode evaluation: every AST node is evaluated to a
// Jet2 (value, gradient, Hessian), giving exact derivatives in one pass.
// Jet1 is the value+gradient truncation used inside root-finding loops.

#include "geomlab/common.hpp"
#include "geomlab/expr.hpp"

#include <cmath>

namespace geomlab {

struct Jet2 {
  double value = 0.0;
  Vec grad;   // length n
  Mat hess;   // n x n, symmetric by construction

  static Jet2 constant(double v, int n) {
    Jet2 j;
    j.value = v;
    j.grad = Vec::Zero(n);
    j.hess = Mat::Zero(n, n);
    return j;
  }
  static Jet2 variable(double v, int i, int n) {
    Jet2 j = constant(v, n);
    j.grad[i] = 1.0;
    return j;
  }
  int dim() const { return static_cast<int>(grad.size()); }
};

struct Jet1 {
  double value = 0.0;
  Vec grad;

  static Jet1 constant(double v, int n) {
    Jet1 j;
    j.value = v;
    j.grad = Vec::Zero(n);
    return j;
  }
  static Jet1 variable(double v, int i, int n) {
    Jet1 j = constant(v, n);
    j.grad[i] = 1.0;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Jet2 arithmetic.

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value + b.value;
  r.grad = a.grad + b.grad;
  r.hess = a.hess + b.hess;
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value - b.value;
  r.grad = a.grad - b.grad;
  r.hess = a.hess - b.hess;
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r;
  r.value = -a.value;
  r.grad = -a.grad;
  r.hess = -a.hess;
  return r;
}

// Symmetric rank-two update u v^T + v u^T with each entry computed once and
// mirrored, so Hessians stay bitwise symmetric.
inline Mat sym_outer(const Vec& u, const Vec& v) {
  const int n = static_cast<int>(u.size());
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = 2.0 * (u[i] * v[i]);
    for (int j = i + 1; j < n; ++j) {
      const double e = u[i] * v[j] + v[i] * u[j];
      m(i, j) = e;
      m(j, i) = e;
    }
  }
  return m;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value * b.value;
  r.grad = a.grad * b.value + b.grad * a.value;
  r.hess = a.hess * b.value + b.hess * a.value + sym_outer(a.grad, b.grad);
  return r;
}

inline Jet2 operator*(double c, const Jet2& a) {
  Jet2 r;
  r.value = c * a.value;
  r.grad = c * a.grad;
  r.hess = c * a.hess;
  return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value / b.value;
  r.grad = (a.grad - r.value * b.grad) / b.value;
  r.hess = (a.hess - r.value * b.hess - sym_outer(r.grad, b.grad)) / b.value;
  return r;
}

// u u^T with each entry computed once and mirrored.
inline Mat self_outer(const Vec& u) {
  const int n = static_cast<int>(u.size());
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = u[i] * u[i];
    for (int j = i + 1; j < n; ++j) {
      const double e = u[i] * u[j];
      m(i, j) = e;
      m(j, i) = e;
    }
  }
  return m;
}

// f(u) with f' and f'' evaluated at u.value.
inline Jet2 chain(double f, double fp, double fpp, const Jet2& u) {
  Jet2 r;
  r.value = f;
  r.grad = fp * u.grad;
  r.hess = fp * u.hess + fpp * self_outer(u.grad);
  return r;
}

inline Jet2 jet_exp(const Jet2& u) {
  const double e = std::exp(u.value);
  return chain(e, e, e, u);
}

inline Jet2 jet_sin(const Jet2& u) {
  return chain(std::sin(u.value), std::cos(u.value), -std::sin(u.value), u);
}

inline Jet2 jet_cos(const Jet2& u) {
  return chain(std::cos(u.value), -std::sin(u.value), -std::cos(u.value), u);
}

// ---------------------------------------------------------------------------
// Jet1 arithmetic (mirrors the value/gradient rows of Jet2).

inline Jet1 operator+(const Jet1& a, const Jet1& b) {
  Jet1 r;
  r.value = a.value + b.value;
  r.grad = a.grad + b.grad;
  return r;
}
inline Jet1 operator-(const Jet1& a, const Jet1& b) {
  Jet1 r;
  r.value = a.value - b.value;
  r.grad = a.grad - b.grad;
  return r;
}
inline Jet1 operator-(const Jet1& a) {
  Jet1 r;
  r.value = -a.value;
  r.grad = -a.grad;
  return r;
}
inline Jet1 operator*(const Jet1& a, const Jet1& b) {
  Jet1 r;
  r.value = a.value * b.value;
  r.grad = a.grad * b.value + b.grad * a.value;
  return r;
}
inline Jet1 operator/(const Jet1& a, const Jet1& b) {
  Jet1 r;
  r.value = a.value / b.value;
  r.grad = (a.grad - r.value * b.grad) / b.value;
  return r;
}
inline Jet1 chain(double f, double fp, const Jet1& u) {
  Jet1 r;
  r.value = f;
  r.grad = fp * u.grad;
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace detail {

// Wraps domain faults with the offending sub-expression text.
[[noreturn]] inline void eval_fault(const Expression& e, const ExprNode& n,
                                    const std::string& what) {
  throw EvalError(what + " in sub-expression '" + e.slice(n.span) + "'");
}

inline bool grad_is_zero(const Vec& g) {
  for (int i = 0; i < g.size(); ++i)
    if (g[i] != 0.0) return false;
  return true;
}

// Integer test for exponents applied to non-positive bases.
inline bool is_integral(double p) { return p == std::floor(p) && std::abs(p) < 1e15; }

template <class J>
J eval_node(const Expression& e, const ExprNode& n, const Vec& x, const ParamMap& params);

template <class J>
J eval_pow(const Expression& e, const ExprNode& n, const J& base, const J& expo) {
  const bool const_expo = [&] {
    if constexpr (std::is_same_v<J, Jet2>)
      return grad_is_zero(expo.grad) && expo.hess.isZero(0.0);
    else
      return grad_is_zero(expo.grad);
  }();
  const double b = base.value;
  const double p = expo.value;
  if (const_expo) {
    // Power rule; valid for negative bases when the exponent is integral.
    if (b == 0.0) {
      if (p == 0.0) {
        if constexpr (std::is_same_v<J, Jet2>)
          return Jet2::constant(1.0, base.dim());
        else
          return J{1.0, Vec::Zero(base.grad.size())};
      }
      if (p < 1.0 || (p < 2.0 && p != 1.0 && !is_integral(p)))
        eval_fault(e, n, "zero base with exponent below 2 and non-integral");
      // p == 1, p == 2 or p > 2: derivatives p*0^{p-1}, p(p-1)*0^{p-2}.
      const double fp = (p == 1.0) ? 1.0 : 0.0;
      if constexpr (std::is_same_v<J, Jet2>) {
        const double fpp = (p == 2.0) ? 2.0 : 0.0;
        return chain(0.0, fp, fpp, base);
      } else {
        return chain(0.0, fp, base);
      }
    }
    if (b < 0.0 && !is_integral(p)) eval_fault(e, n, "negative base with non-integer exponent");
    const double f = std::pow(b, p);
    const double fp = p * std::pow(b, p - 1.0);
    if constexpr (std::is_same_v<J, Jet2>) {
      const double fpp = p * (p - 1.0) * std::pow(b, p - 2.0);
      return chain(f, fp, fpp, base);
    } else {
      return chain(f, fp, base);
    }
  }
  // General exponent: a^b = exp(b log a), requires a > 0.
  if (b <= 0.0) eval_fault(e, n, "non-positive base with non-constant exponent");
  if constexpr (std::is_same_v<J, Jet2>) {
    const Jet2 lg = chain(std::log(b), 1.0 / b, -1.0 / (b * b), base);
    return jet_exp(expo * lg);
  } else {
    const Jet1 lg = chain(std::log(b), 1.0 / b, base);
    const Jet1 prod = expo * lg;
    return chain(std::exp(prod.value), std::exp(prod.value), prod);
  }
}

template <class J>
J eval_node(const Expression& e, const ExprNode& n, const Vec& x, const ParamMap& params) {
  const int dim = static_cast<int>(x.size());
  switch (n.kind) {
    case NodeKind::Number:
      return J::constant(n.number, dim);
    case NodeKind::Variable:
      return J::variable(x[n.var], n.var, dim);
    case NodeKind::Parameter: {
      auto it = params.find(n.param);
      if (it == params.end()) eval_fault(e, n, "unbound parameter '" + n.param + "'");
      return J::constant(it->second, dim);
    }
    case NodeKind::Negate:
      return -eval_node<J>(e, *n.lhs, x, params);
    case NodeKind::Binary: {
      const J a = eval_node<J>(e, *n.lhs, x, params);
      const J b = eval_node<J>(e, *n.rhs, x, params);
      switch (n.op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div:
          if (b.value == 0.0) eval_fault(e, n, "division by zero");
          return a / b;
        case BinaryOp::Pow: return eval_pow<J>(e, n, a, b);
      }
      eval_fault(e, n, "bad operator");
    }
    case NodeKind::Call: {
      const J u = eval_node<J>(e, *n.lhs, x, params);
      switch (n.func) {
        case FuncId::Exp:
          if constexpr (std::is_same_v<J, Jet2>) {
            return jet_exp(u);
          } else {
            const double v = std::exp(u.value);
            return chain(v, v, u);
          }
        case FuncId::Log:
          if (u.value <= 0.0) eval_fault(e, n, "log of a non-positive value");
          if constexpr (std::is_same_v<J, Jet2>)
            return chain(std::log(u.value), 1.0 / u.value, -1.0 / (u.value * u.value), u);
          else
            return chain(std::log(u.value), 1.0 / u.value, u);
        case FuncId::Sqrt: {
          if (u.value <= 0.0) eval_fault(e, n, "sqrt of a non-positive value");
          const double s = std::sqrt(u.value);
          if constexpr (std::is_same_v<J, Jet2>)
            return chain(s, 0.5 / s, -0.25 / (s * u.value), u);
          else
            return chain(s, 0.5 / s, u);
        }
        case FuncId::Sin:
          if constexpr (std::is_same_v<J, Jet2>)
            return jet_sin(u);
          else
            return chain(std::sin(u.value), std::cos(u.value), u);
        case FuncId::Cos:
          if constexpr (std::is_same_v<J, Jet2>)
            return jet_cos(u);
          else
            return chain(std::cos(u.value), -std::sin(u.value), u);
      }
      eval_fault(e, n, "bad function");
    }
  }
  eval_fault(e, n, "bad node");
}

}  // namespace detail

// Exact value/gradient/Hessian of the expression at x.
inline Jet2 eval_jet2(const Expression& e, const Vec& x, const ParamMap& params = {}) {
  if (e.empty()) throw EvalError("empty expression");
  if (static_cast<int>(x.size()) != e.dimension())
    throw EvalError("point dimension does not match expression dimension");
  Jet2 j = detail::eval_node<Jet2>(e, *e.root(), x, params);
  if (!std::isfinite(j.value) || !j.grad.allFinite() || !j.hess.allFinite())
    throw EvalError("non-finite result evaluating '" + e.source() + "'");
  return j;
}

// Value/gradient truncation; used in ray-casting inner loops.
inline Jet1 eval_jet1(const Expression& e, const Vec& x, const ParamMap& params = {}) {
  if (e.empty()) throw EvalError("empty expression");
  if (static_cast<int>(x.size()) != e.dimension())
    throw EvalError("point dimension does not match expression dimension");
  Jet1 j = detail::eval_node<Jet1>(e, *e.root(), x, params);
  if (!std::isfinite(j.value) || !j.grad.allFinite())
    throw EvalError("non-finite result evaluating '" + e.source() + "'");
  return j;
}

inline double eval_value(const Expression& e, const Vec& x, const ParamMap& params = {}) {
  return eval_jet1(e, x, params).value;
}

}  // namespace geomlab
