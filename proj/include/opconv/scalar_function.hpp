#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace opconv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Domain of a scalar function. Infinite sides are always open.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool lo_closed = false;
  bool hi_closed = false;

  static Interval real_line() { return {}; }
  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }

  bool contains(double x, double tol = 0.0) const;
  bool bounded() const { return lo > -kInf && hi < kInf; }
};

enum class Side { Plus, Minus };

using RealFn = std::function<double(double)>;

// A real function on an interval, optionally with exact one-sided derivatives.
// Evaluators must be reentrant; the descriptor is immutable once built.
struct ScalarFunction {
  std::string name;
  Interval interval;
  RealFn eval;
  RealFn deriv_plus;   // empty when unknown
  RealFn deriv_minus;  // empty when unknown
  std::map<std::string, double> params;
  std::string spec;  // mini-language string this was parsed from, if any

  double operator()(double x) const { return eval(x); }
  bool has_analytic_derivatives() const {
    return static_cast<bool>(deriv_plus) && static_cast<bool>(deriv_minus);
  }
};

namespace functions {

ScalarFunction square();
ScalarFunction abs();
ScalarFunction exp();
ScalarFunction abspow(double p);
// Convex, C^1, affine on [-w, w] and quadratic outside.
ScalarFunction hinge_splice(double w);
ScalarFunction polyline(std::vector<std::pair<double, double>> points);
ScalarFunction identity();
// coefficients[k] multiplies x^k.
ScalarFunction polynomial(std::vector<double> coefficients);
// x / (1 + x^2): bounded and continuous on the whole line.
ScalarFunction bounded_transform();
// Wraps an arbitrary evaluator; derivatives fall back to finite differences.
ScalarFunction custom(std::string name, Interval interval, RealFn eval);

}  // namespace functions

// Parses `square`, `abs`, `exp`, `abspow:p`, `hinge-splice:w`,
// `polyline:x1,y1;x2,y2;...`. Throws Error(ParseError) on bad input.
ScalarFunction parse_function_spec(const std::string& spec);

}  // namespace opconv
