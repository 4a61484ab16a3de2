#pragma once

// Shared numeric kit: small stack-allocated vectors/matrices, error types,
// deterministic reductions and the central tolerance block.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace geomlab {

// Ambient dimensions handled by the field/metric machinery. Keeps every
// per-point object on the stack.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed expression text; offset is a byte position into the source.
struct ParseError : Error {
  ParseError(std::size_t offset_, const std::string& what_)
      : Error("parse error at offset " + std::to_string(offset_) + ": " + what_),
        offset(offset_) {}
  std::size_t offset;
};

// Evaluation left the mathematical domain (log of a non-positive value, ...).
struct EvalError : Error {
  using Error::Error;
};

// Numerical degeneracy: non-SPD metric, vanishing gradient, denominator
// underflow, failed root bracket.
struct NumericError : Error {
  using Error::Error;
};

// Scenario file violated the schema; `field` is a JSON-pointer-style path.
struct ConfigError : Error {
  ConfigError(const std::string& field_, const std::string& what_)
      : Error(field_ + ": " + what_), field(field_) {}
  std::string field;
};

using ParamMap = std::map<std::string, double>;

// Central tolerance block. Every threshold used by the library lives here so
// a scenario file can override any of them in one place.
struct Tolerances {
  double surface_residual = 1e-12;   // |log F_lambda| target for ray casting
  double sample_residual = 1e-10;    // hard gate on emitted samples
  double cross_check = 1e-8;         // dual-code-path agreement
  double fd_check = 1e-5;            // finite-difference cross validation
  double active_set = 1e-9;          // |u_i| <= tau marks the face as active
  double spd_floor = 1e-10;          // min eigenvalue / trace for metric SPD
  double regular_value = 1e-6;       // |grad u| floor at boundary samples
  double denominator_floor = 1e-10;  // normal-field denominators
  double hypothesis = 1e-8;          // pass/fail slack for hypothesis checks
};

// ---------------------------------------------------------------------------
// Deterministic reductions.

// Pairwise summation over a contiguous range, keyed purely by index order.
// The result is independent of how callers partitioned the work beforehand.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

// Deterministic parallel map: slot i of the result is produced by fn(i)
// regardless of the worker count. Exceptions are rethrown on the caller.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Small dense helpers.

// Sum of singular values. Domains/codomains are encoded by the bases used to
// build M, so this is always an ordinary Euclidean SVD.
inline double trace_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

// Surface area of the unit (n-1)-sphere in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

// Shortest-round-trip style fixed formatting; identical bytes for identical
// doubles, used by every CSV/JSON writer.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace geomlab
