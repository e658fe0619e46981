#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opconv/scalar_function.hpp"
#include "opconv/spectral.hpp"

namespace opconv {

// Decomposition R^dim = H_1 (+) ... (+) H_n into consecutive coordinate blocks.
class BlockStructure {
 public:
  explicit BlockStructure(std::vector<std::size_t> sizes);

  std::size_t dim() const { return dim_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t offset(std::size_t block) const { return offsets_[block]; }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_ = 0;
};

struct BoundPair {
  double lhs;
  double rhs;
  double slack() const { return rhs - lhs; }
};

// lhs = v^T P v, rhs = sum over nonzero blocks of u_i^T P_ii u_i with u_i the
// normalised block components of v. Throws NotPSD.
BoundPair hadamard_vector_bound(const SymMatrix& p, const BlockStructure& blocks, const Eigen::VectorXd& v);

// lhs = ||P||, rhs = sum of ||P_ii||. Throws NotPSD.
BoundPair block_norm_bound(const SymMatrix& p, const BlockStructure& blocks);

struct ChordGapCheck {
  double lhs;       // || chi_[a,x](H) chi_[y,inf)(H) chi_[a,x](H) ||
  double bound_gb;  // gamma / beta
  double bound_xy;  // (x - a) / (y - x)
  double gamma;
  double beta;
  // min eigenvalue of g(H) + gamma 1 - beta chi_[y,inf)(H)
  double operator_margin;

  bool scalar_ok() const { return bound_gb <= bound_xy + 1e-9; }
  bool operator_ok() const { return operator_margin >= -1e-9; }
};

ChordGapCheck chord_gap_check(const SymMatrix& h, const ScalarFunction& f, double a, double x, double y);

struct ScanRecord {
  std::uint64_t seed;
  std::size_t trial;
  std::size_t dim;
  std::size_t m;
  std::string f_name;
  double jensen_defect;
  double commutator;
  bool probe = false;  // the 2x2 affine-chord counterexample, not a random draw
};

struct ScanSettings {
  std::size_t dim = 8;
  std::size_t m = 3;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  double lo = -1.0;  // spectrum bracket for the random H
  double hi = 1.0;
};

// || f(pr H) - pr f(H) ||
double jensen_defect(const SymMatrix& h, const SubspaceProjection& m, const ScalarFunction& f);

// Random (H, M) pairs, sorted by trial index. When f admits an affine chord
// on [lo, hi] the 2x2 counterexample probe is prepended.
std::vector<ScanRecord> jensen_commutator_scan(const ScalarFunction& f, const ScanSettings& settings);

struct ModulusRow {
  double eps;
  double delta;  // +inf when no record has commutator >= eps
  std::size_t support;
};

// 32 log-spaced eps in [1e-4, 1]; delta(eps) = min defect over records with
// commutator >= eps.
std::vector<ModulusRow> empirical_modulus(const std::vector<ScanRecord>& records);

}  // namespace opconv
