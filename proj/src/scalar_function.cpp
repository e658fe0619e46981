#include "opconv/scalar_function.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "opconv/error.hpp"

namespace opconv {

bool Interval::contains(double x, double tol) const {
  if (!std::isfinite(x)) return false;
  const bool above_lo = lo_closed ? x >= lo - tol : (lo == -kInf || x > lo - tol);
  const bool below_hi = hi_closed ? x <= hi + tol : (hi == kInf || x < hi + tol);
  return above_lo && below_hi;
}

namespace functions {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

ScalarFunction square() {
  ScalarFunction f;
  f.name = "square";
  f.spec = "square";
  f.eval = [](double x) { return x * x; };
  f.deriv_plus = [](double x) { return 2.0 * x; };
  f.deriv_minus = f.deriv_plus;
  return f;
}

ScalarFunction abs() {
  ScalarFunction f;
  f.name = "abs";
  f.spec = "abs";
  f.eval = [](double x) { return std::fabs(x); };
  f.deriv_plus = [](double x) { return x >= 0.0 ? 1.0 : -1.0; };
  f.deriv_minus = [](double x) { return x > 0.0 ? 1.0 : -1.0; };
  return f;
}

ScalarFunction exp() {
  ScalarFunction f;
  f.name = "exp";
  f.spec = "exp";
  f.eval = [](double x) { return std::exp(x); };
  f.deriv_plus = f.eval;
  f.deriv_minus = f.eval;
  return f;
}

ScalarFunction abspow(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::ParseError, "abspow exponent must be finite and > 1");
  }
  ScalarFunction f;
  f.name = "abspow";
  std::ostringstream spec;
  spec << "abspow:" << p;
  f.spec = spec.str();
  f.params["p"] = p;
  f.eval = [p](double x) { return std::pow(std::fabs(x), p); };
  f.deriv_plus = [p](double x) { return p * sign(x) * std::pow(std::fabs(x), p - 1.0); };
  f.deriv_minus = f.deriv_plus;
  return f;
}

ScalarFunction hinge_splice(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw Error(ErrorKind::ParseError, "hinge-splice half-width must be finite and > 0");
  }
  ScalarFunction f;
  f.name = "hinge-splice";
  std::ostringstream spec;
  spec << "hinge-splice:" << w;
  f.spec = spec.str();
  f.params["w"] = w;
  // 0.5 x + (|x| - w)_+^2
  f.eval = [w](double x) {
    const double excess = std::max(0.0, std::fabs(x) - w);
    return 0.5 * x + excess * excess;
  };
  f.deriv_plus = [w](double x) {
    const double excess = std::max(0.0, std::fabs(x) - w);
    return 0.5 + 2.0 * sign(x) * excess;
  };
  f.deriv_minus = f.deriv_plus;
  return f;
}

ScalarFunction polyline(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw Error(ErrorKind::ParseError, "polyline needs at least two points");
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!std::isfinite(points[k].first) || !std::isfinite(points[k].second)) {
      throw Error(ErrorKind::ParseError, "polyline points must be finite");
    }
    if (k > 0 && !(points[k].first > points[k - 1].first)) {
      throw Error(ErrorKind::ParseError, "polyline abscissae must be strictly increasing");
    }
  }
  ScalarFunction f;
  f.name = "polyline";
  std::ostringstream spec;
  spec.precision(17);
  spec << "polyline:";
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k > 0) spec << ';';
    spec << points[k].first << ',' << points[k].second;
  }
  f.spec = spec.str();
  f.params["points"] = static_cast<double>(points.size());
  f.interval = Interval::closed(points.front().first, points.back().first);

  std::vector<double> xs, ys, slopes;
  for (const auto& [x, y] : points) {
    xs.push_back(x);
    ys.push_back(y);
  }
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    slopes.push_back((ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]));
  }
  const std::size_t segments = slopes.size();
  // Segment k covers [xs[k], xs[k+1]].
  auto segment_right_of = [xs, segments](double x) {
    // largest k with xs[k] <= x, clamped to a valid segment
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t k = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    return std::min(k, segments - 1);
  };
  auto segment_left_of = [xs, segments](double x) {
    // smallest k with x <= xs[k+1]
    const auto it = std::lower_bound(xs.begin() + 1, xs.end(), x);
    std::size_t k = it == xs.end() ? segments - 1 : static_cast<std::size_t>(it - xs.begin()) - 1;
    return std::min(k, segments - 1);
  };
  f.eval = [xs, ys, slopes, segment_right_of](double x) {
    const std::size_t k = segment_right_of(x);
    return ys[k] + slopes[k] * (x - xs[k]);
  };
  f.deriv_plus = [slopes, segment_right_of](double x) { return slopes[segment_right_of(x)]; };
  f.deriv_minus = [slopes, segment_left_of](double x) { return slopes[segment_left_of(x)]; };
  return f;
}

ScalarFunction identity() {
  ScalarFunction f;
  f.name = "identity";
  f.eval = [](double x) { return x; };
  f.deriv_plus = [](double) { return 1.0; };
  f.deriv_minus = f.deriv_plus;
  return f;
}

ScalarFunction polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) coefficients.push_back(0.0);
  ScalarFunction f;
  f.name = "polynomial";
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    f.params["c" + std::to_string(k)] = coefficients[k];
  }
  f.eval = [coefficients](double x) {
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  f.deriv_plus = [coefficients](double x) {
    double acc = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 1;) {
      acc = acc * x + static_cast<double>(k) * coefficients[k];
    }
    return acc;
  };
  f.deriv_minus = f.deriv_plus;
  return f;
}

ScalarFunction bounded_transform() {
  ScalarFunction f;
  f.name = "bounded-transform";
  f.eval = [](double x) { return x / (1.0 + x * x); };
  f.deriv_plus = [](double x) {
    const double d = 1.0 + x * x;
    return (1.0 - x * x) / (d * d);
  };
  f.deriv_minus = f.deriv_plus;
  return f;
}

ScalarFunction custom(std::string name, Interval interval, RealFn eval) {
  ScalarFunction f;
  f.name = std::move(name);
  f.interval = interval;
  f.eval = std::move(eval);
  return f;
}

}  // namespace functions

namespace {

double parse_real(const std::string& text, const std::string& context) {
  if (text.empty()) throw Error(ErrorKind::ParseError, "empty number in " + context);
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(value)) {
    throw Error(ErrorKind::ParseError, "bad number '" + text + "' in " + context);
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char delimiter) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == delimiter) {
      parts.push_back(current);
      current.clear();
    } else if (c != ' ') {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

}  // namespace

ScalarFunction parse_function_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const bool has_arg = colon != std::string::npos;

  if (head == "square" && !has_arg) return functions::square();
  if (head == "abs" && !has_arg) return functions::abs();
  if (head == "exp" && !has_arg) return functions::exp();
  if (head == "abspow" && has_arg) return functions::abspow(parse_real(tail, spec));
  if (head == "hinge-splice" && has_arg) return functions::hinge_splice(parse_real(tail, spec));
  if (head == "polyline" && has_arg) {
    std::vector<std::pair<double, double>> points;
    for (const auto& pair : split(tail, ';')) {
      const auto xy = split(pair, ',');
      if (xy.size() != 2) throw Error(ErrorKind::ParseError, "polyline point '" + pair + "'");
      points.emplace_back(parse_real(xy[0], spec), parse_real(xy[1], spec));
    }
    auto f = functions::polyline(std::move(points));
    f.spec = spec;
    return f;
  }
  throw Error(ErrorKind::ParseError, "unknown function spec '" + spec + "'");
}

}  // namespace opconv
