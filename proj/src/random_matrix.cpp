#include "opconv/random_matrix.hpp"

#include <cmath>
#include <numbers>

#include "opconv/error.hpp"

namespace opconv::random {

namespace {
Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
}  // namespace

Eigen::MatrixXd orthogonal(std::size_t dim, SplitMix64& rng) {
  const Eigen::Index n = idx(dim);
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
  if (dim < 2) {
    if (dim == 1 && rng.uniform() < 0.5) q(0, 0) = -1.0;
    return q;
  }
  for (std::size_t r = 0; r < dim * dim; ++r) {
    const auto p = idx(rng.below(dim));
    auto s = idx(rng.below(dim - 1));
    if (s >= p) ++s;
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double c = std::cos(angle);
    const double sn = std::sin(angle);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double a = q(k, p);
      const double b = q(k, s);
      q(k, p) = c * a - sn * b;
      q(k, s) = sn * a + c * b;
    }
  }
  return q;
}

SymMatrix symmetric_with_eigenvalues(const std::vector<double>& eigenvalues, SplitMix64& rng) {
  const Eigen::MatrixXd q = orthogonal(eigenvalues.size(), rng);
  Eigen::VectorXd lambda(idx(eigenvalues.size()));
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) lambda(idx(i)) = eigenvalues[i];
  const Eigen::MatrixXd h = q * lambda.asDiagonal() * q.transpose();
  return SymMatrix(0.5 * (h + h.transpose()));
}

SymMatrix symmetric_with_spectrum(std::size_t dim, double lo, double hi, SplitMix64& rng) {
  if (!(lo <= hi)) throw Error(ErrorKind::BadRange, "spectrum bracket must satisfy lo <= hi");
  std::vector<double> lambda(dim);
  for (auto& l : lambda) l = rng.uniform(lo, hi);
  return symmetric_with_eigenvalues(lambda, rng);
}

SymMatrix psd(std::size_t dim, std::size_t rank, SplitMix64& rng) {
  Eigen::MatrixXd a(idx(dim), idx(rank));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd p = a * a.transpose();
  return SymMatrix(0.5 * (p + p.transpose()));
}

SymMatrix unit_norm_symmetric(std::size_t dim, SplitMix64& rng) {
  Eigen::MatrixXd g(idx(dim), idx(dim));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      g(i, j) = rng.normal();
      g(j, i) = g(i, j);
    }
  }
  SymMatrix h(std::move(g));
  const double norm = operator_norm(h);
  return norm > 0.0 ? (1.0 / norm) * h : h;
}

Eigen::VectorXd unit_vector(std::size_t dim, SplitMix64& rng) {
  Eigen::VectorXd v(idx(dim));
  double norm = 0.0;
  while (norm < 1e-8) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    norm = v.norm();
  }
  return v / norm;
}

SubspaceProjection subspace(std::size_t dim, std::size_t m, SplitMix64& rng) {
  const Eigen::MatrixXd q = orthogonal(dim, rng);
  return SubspaceProjection(q.leftCols(idx(m)));
}

}  // namespace opconv::random
