#pragma once

#include <optional>
#include <vector>

#include "opconv/scalar_function.hpp"

namespace opconv {

// Evidence that f is affine along the chord [x, y] at weight t.
struct ChordWitness {
  double x;
  double y;
  double t;
  double defect;  // f(t x + (1-t) y) - (t f(x) + (1-t) f(y))

  static ChordWitness make(const ScalarFunction& f, double x, double y, double t);
  double interior_point() const { return t * x + (1.0 - t) * y; }
};

// g = f - chord through (a, f(a)) and (x, f(x)). gamma = -min g on [a, x],
// attained at c; beta(y) = g(y) for y > x.
struct ChordNormalization {
  double a;
  double x;
  double slope;      // chord slope
  double intercept;  // chord value at 0
  ScalarFunction g;
  double gamma;
  double c;

  double beta_of(double y) const { return g(y); }
};

struct Partition {
  std::vector<double> points;  // strictly ascending
};

// One row of the derivative-gap table: f'(x_j-) - f'(x_{j-1}+).
struct PartitionGap {
  double left;
  double right;
  double gap;
};

struct PartitionResult {
  Partition partition;
  std::vector<double> kinks;  // detected points with jump >= eps
  std::vector<PartitionGap> gaps;
};

namespace convexity {
inline constexpr double kGoldenTolerance = 1e-12;
inline constexpr double kNumericDerivativeBudget = 1e-5;
inline constexpr double kNumericEpsFloor = 1e-4;
inline constexpr std::size_t kMaxPartitionPoints = 1'000'000;
inline constexpr double kChordExactness = 1e-10;
}  // namespace convexity

// Analytic evaluator when available, otherwise a second-order one-sided
// difference with step max(1e-6, 1e-6 |x|), Richardson-extrapolated once.
double one_sided_derivative(const ScalarFunction& f, double x, Side side);

// Minimises `objective` on [lo, hi] to an argument bracket of `tol`; ties go left.
double golden_section_minimize(const RealFn& objective, double lo, double hi,
                               double tol = convexity::kGoldenTolerance);

// Mesh search for a chord along which f is affine. A witness disproves strict
// convexity (and strict concavity); std::nullopt proves nothing.
std::optional<ChordWitness> find_affine_chord(const ScalarFunction& f, double lo, double hi, int grid = 41,
                                              double tol = 1e-10);

ChordNormalization chord_normalize(const ScalarFunction& f, double a, double x);

// Partition x0 < x1 < ... < xn = x with f'(x_j-) - f'(x_{j-1}+) < eps.
PartitionResult epsilon_partition(const ScalarFunction& f, double x0, double x, double eps);

// min over grid pairs of (f(u) + f(v)) / 2 - f((u + v) / 2).
double strictness_margin(const ScalarFunction& f, double lo, double hi, int grid);

}  // namespace opconv
