#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "opconv/scalar_function.hpp"

namespace opconv {

// Real symmetric matrix; the finite-dimensional stand-in for a bounded
// self-adjoint operator. Construction validates finiteness and symmetry.
class SymMatrix {
 public:
  explicit SymMatrix(Eigen::MatrixXd entries);

  static SymMatrix zero(std::size_t dim);
  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(const std::vector<double>& values);
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Eigen::MatrixXd entries_;
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);

// Eigenvalues ascending; columns of `vectors` are the matching eigenvectors.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;

  double min() const { return eigenvalues(0); }
  double max() const { return eigenvalues(eigenvalues.size() - 1); }
};

// Orthonormal basis (columns) of a subspace M of R^dim.
class SubspaceProjection {
 public:
  explicit SubspaceProjection(Eigen::MatrixXd basis);

  // span(e_1, ..., e_m)
  static SubspaceProjection leading_coordinates(std::size_t dim, std::size_t m);

  std::size_t dim() const { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  // P = B B^T
  Eigen::MatrixXd projector() const { return basis_ * basis_.transpose(); }

 private:
  Eigen::MatrixXd basis_;
};

// Finite union of closed intervals; either side of an interval may be infinite.
class ClosedSet {
 public:
  struct Piece {
    double lo;
    double hi;
  };

  ClosedSet() = default;
  explicit ClosedSet(std::vector<Piece> pieces);

  static ClosedSet point(double x) { return ClosedSet({{x, x}}); }
  static ClosedSet interval(double lo, double hi) { return ClosedSet({{lo, hi}}); }
  static ClosedSet at_least(double lo) { return ClosedSet({{lo, kInf}}); }
  static ClosedSet at_most(double hi) { return ClosedSet({{-kInf, hi}}); }

  bool contains(double x, double tol) const;
  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  std::vector<Piece> pieces_;
};

namespace tolerance {
inline constexpr double kSymmetry = 1e-12;
inline constexpr double kDomain = 1e-9;
inline constexpr double kMembership = 1e-9;
inline constexpr double kPsd = 1e-9;
inline constexpr double kJacobiOffDiagonal = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;
}  // namespace tolerance

// Cyclic Jacobi. Deterministic: fixed row-wise sweep order, ties in the final
// ascending sort resolved by original diagonal index.
EigenDecomposition eig_sym(const SymMatrix& h);

// f(H) = V diag(f(lambda)) V^T. Throws SpectrumOutOfDomain when an eigenvalue
// lies outside f's interval by more than tolerance::kDomain.
SymMatrix matrix_function(const SymMatrix& h, const ScalarFunction& f);
SymMatrix matrix_function(const EigenDecomposition& eig, const ScalarFunction& f);

// Orthogonal projection onto eigenvectors whose eigenvalue lies in `set`.
SymMatrix spectral_projection(const SymMatrix& h, const ClosedSet& set);
SymMatrix spectral_projection(const EigenDecomposition& eig, const ClosedSet& set);

// B^T H B
SymMatrix compress(const SymMatrix& h, const SubspaceProjection& m);

double operator_norm(const SymMatrix& h);
// Largest singular value of a general square matrix.
double spectral_norm(const Eigen::MatrixXd& a);

// || P H - H P || with P the projector onto M.
double commutator_norm(const SymMatrix& h, const SubspaceProjection& m);

bool is_psd(const SymMatrix& h);

// Direct sum A (+) B.
SymMatrix direct_sum(const SymMatrix& a, const SymMatrix& b);

}  // namespace opconv
