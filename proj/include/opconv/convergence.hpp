#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opconv/convexity.hpp"
#include "opconv/scalar_function.hpp"
#include "opconv/spectral.hpp"

namespace opconv {

// Finite stand-in for a net (H_i) together with its candidate limit.
struct OperatorSequence {
  std::vector<SymMatrix> terms;
  SymMatrix target;

  OperatorSequence(std::vector<SymMatrix> terms, SymMatrix target);

  std::size_t dim() const { return target.dim(); }
  std::size_t size() const { return terms.size(); }
};

// Unit vectors probing the weak and strong topologies.
class TestVectorSet {
 public:
  TestVectorSet(std::size_t dim, std::vector<Eigen::VectorXd> vectors);

  // e_1, ..., e_k
  static TestVectorSet basis(std::size_t dim, std::size_t k);
  // e_1, ..., e_min(16, dim) plus 8 seeded random unit vectors.
  static TestVectorSet standard(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  const std::vector<Eigen::VectorXd>& vectors() const { return vectors_; }

 private:
  std::size_t dim_;
  std::vector<Eigen::VectorXd> vectors_;
};

struct Thresholds {
  double weak = 1e-6;
  double strong = 1e-6;
};

struct Verdicts {
  bool weak_ok = false;
  bool f_weak_ok = false;
  bool strong_ok = false;
  // weak_ok && f_weak_ok && !strong_ok: the pattern strict convexity forbids.
  bool violation_candidate = false;
};

struct ConvergenceReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string function;
  std::map<std::string, double> params;
  Thresholds thresholds;
  std::vector<double> weak;
  std::vector<double> f_weak;
  std::vector<double> strong;
  std::vector<double> phi_strong;  // bounded-transform strong residuals; empty unless requested
  Verdicts verdicts;
};

// max over ordered pairs (u, v) of |u^T (Hi - H) v|
double weak_residual(const SymMatrix& hi, const SymMatrix& h, const TestVectorSet& tests);
// max over v of || (Hi - H) v ||
double strong_residual(const SymMatrix& hi, const SymMatrix& h, const TestVectorSet& tests);

struct ShiftParams {
  std::size_t m = 1;         // M = span of the first m coordinates of H
  double x0 = 0.0;           // point of sigma(H) used as padding
  std::size_t shift_len = 64;  // L, length of the truncated shift on the tail
  std::size_t steps = 32;
};

// Terms n = 1..steps of V^n H~ V*^n + x0 (1 - V^n V*^n) on R^(m+L), where
// V = 1_M (+) S, S the truncated unilateral shift on the tail and H~ is H
// padded by x0. Target: compress(H, M) (+) x0 * 1.
OperatorSequence shift_construction(const SymMatrix& h, const ShiftParams& params);

struct Counterexample {
  SymMatrix h0;
  ChordWitness witness;
  double jensen_defect;  // |f(pr H0) - pr f(H0)|
  double commutator;     // ||P H0 - H0 P||, P onto span(e_1)
};

// H0 = x R + y (1 - R) with R the rank-one projection onto
// (sqrt t, sqrt(1 - t)); sigma(H0) = {x, y} and pr f(H0) = f(pr H0).
Counterexample counterexample_2x2(const ScalarFunction& f, double lo, double hi, int grid = 41, double tol = 1e-10);

ConvergenceReport transfer_experiment(const OperatorSequence& seq, const ScalarFunction& f,
                                       const TestVectorSet& tests, const Thresholds& thresholds);

// transfer_experiment with f = x^2, plus strong residuals of x / (1 + x^2).
ConvergenceReport kaplansky_demo(const OperatorSequence& seq, const TestVectorSet& tests,
                                 const Thresholds& thresholds);

enum class MultiplierClass { Multiplier, QuasiMultiplier, Neither };
std::string to_string(MultiplierClass c);

// Sequence-algebra surrogate: QM when last-quartile weak residuals <= tol_weak,
// M when additionally last-quartile strong residuals <= tol_strong.
MultiplierClass multiplier_classify(const OperatorSequence& seq, const TestVectorSet& tests, double tol_weak,
                                    double tol_strong);

// Applies f termwise (including the target).
OperatorSequence apply_function(const OperatorSequence& seq, const ScalarFunction& f);

struct CornerAlgebraInstance {
  double alpha;
  Counterexample source;
  OperatorSequence h;    // H_n = diag(alpha, 0), H_inf = H
  OperatorSequence p;    // p_n = diag(1, 0), p_inf = 1
  OperatorSequence f_h;  // f computed in the corner p_n M_2 p_n; f(H) at infinity
  OperatorSequence chi;  // chi_{alpha}(h), computed in the same corners
  double h_block_defect;    // max_n || p_n H_inf p_n - H_n ||
  double f_h_block_defect;  // max_n || p_n f(H_inf) p_n - f(h)_n ||
  double chi_limit_gap;     // || lim chi_n - chi_inf ||
};

CornerAlgebraInstance corner_algebra_instance(const ScalarFunction& f, std::size_t finite_terms = 8, double lo = -1.0,
                               double hi = 1.0);

enum class ConvergentFamily { Drift, Rotation };

// Sequences converging in norm to a random target with spectrum in [lo, hi]:
// Drift is (1 - s_i) H + s_i G with s_i = 2^-i, Rotation conjugates H by
// Givens rotations whose angle halves each step.
OperatorSequence convergent_sequence(ConvergentFamily family, std::size_t dim, std::size_t terms, double lo,
                                     double hi, std::uint64_t seed);

}  // namespace opconv
