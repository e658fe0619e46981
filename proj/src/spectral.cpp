#include "opconv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "opconv/error.hpp"

namespace opconv {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string describe(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

// Column-sparse V diag(w) V^T. Eigenvector matrices of structured inputs are
// mostly identity columns, so skipping zero entries keeps large padded
// operators cheap. Products are formed in a fixed order, so the result is
// exactly symmetric.
Eigen::MatrixXd weighted_outer_sum(const Eigen::MatrixXd& vectors, const std::vector<double>& weights) {
  const Eigen::Index n = vectors.rows();
  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Index> support;
  support.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    const double w = weights[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    support.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (vectors(i, k) != 0.0) support.push_back(i);
    }
    for (Eigen::Index i : support) {
      const double wi = w * vectors(i, k);
      for (Eigen::Index j : support) result(i, j) += wi * vectors(j, k);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (result(i, j) + result(j, i));
      result(i, j) = avg;
      result(j, i) = avg;
    }
  }
  return result;
}

}  // namespace

SymMatrix::SymMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "symmetric matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  const Eigen::Index n = entries_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::fabs(entries_(i, j) - entries_(j, i)) > tolerance::kSymmetry * scale) {
        std::ostringstream msg;
        msg << "entry (" << i << "," << j << ") differs from its transpose";
        throw Error(ErrorKind::NotSymmetric, msg.str());
      }
    }
  }
}

SymMatrix SymMatrix::zero(std::size_t dim) { return SymMatrix(Eigen::MatrixXd::Zero(idx(dim), idx(dim))); }

SymMatrix SymMatrix::identity(std::size_t dim) {
  return SymMatrix(Eigen::MatrixXd::Identity(idx(dim), idx(dim)));
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& values) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(idx(values.size()), idx(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(idx(i), idx(i)) = values[i];
  return SymMatrix(std::move(m));
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  Eigen::MatrixXd m(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw Error(ErrorKind::DimensionMismatch, "ragged matrix rows");
    for (std::size_t j = 0; j < n; ++j) m(idx(i), idx(j)) = rows[i][j];
  }
  return SymMatrix(std::move(m));
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "matrix sum");
  return SymMatrix(a.entries() + b.entries());
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "matrix difference");
  return SymMatrix(a.entries() - b.entries());
}

SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(s * a.entries()); }

SubspaceProjection::SubspaceProjection(Eigen::MatrixXd basis) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.cols() > basis_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "subspace rank must satisfy 1 <= m <= dim");
  }
  if (!basis_.allFinite()) throw Error(ErrorKind::NonFinite, "subspace basis has non-finite entries");
  const Eigen::MatrixXd gram = basis_.transpose() * basis_;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(basis_.cols(), basis_.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorKind::BadRange, "subspace basis columns are not orthonormal");
  }
}

SubspaceProjection SubspaceProjection::leading_coordinates(std::size_t dim, std::size_t m) {
  return SubspaceProjection(Eigen::MatrixXd::Identity(idx(dim), idx(m)));
}

ClosedSet::ClosedSet(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  for (const auto& p : pieces_) {
    if (std::isnan(p.lo) || std::isnan(p.hi) || p.lo > p.hi) {
      throw Error(ErrorKind::BadRange, "closed set piece must satisfy lo <= hi");
    }
  }
}

bool ClosedSet::contains(double x, double tol) const {
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [&](const Piece& p) { return x >= p.lo - tol && x <= p.hi + tol; });
}

EigenDecomposition eig_sym(const SymMatrix& h) {
  const Eigen::Index n = idx(h.dim());
  Eigen::MatrixXd a = 0.5 * (h.entries() + h.entries().transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double threshold = tolerance::kJacobiOffDiagonal * a.norm();
  auto off_diagonal_norm = [&] {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) sum += a(i, j) * a(i, j);
    }
    return std::sqrt(2.0 * sum);
  };

  bool converged = false;
  for (int sweep = 0; sweep <= tolerance::kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_norm() <= threshold) {
      converged = true;
      break;
    }
    if (sweep == tolerance::kJacobiMaxSweeps) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          if (akp == 0.0 && akq == 0.0) continue;
          const double new_kp = c * akp - s * akq;
          const double new_kq = s * akp + c * akq;
          a(k, p) = new_kp;
          a(p, k) = new_kp;
          a(k, q) = new_kq;
          a(q, k) = new_kq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          if (vkp == 0.0 && vkq == 0.0) continue;
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw Error(ErrorKind::ConvergenceFailure,
                "Jacobi did not converge in " + std::to_string(tolerance::kJacobiMaxSweeps) + " sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

SymMatrix matrix_function(const EigenDecomposition& eig, const ScalarFunction& f) {
  const Interval& dom = f.interval;
  std::vector<double> values(static_cast<std::size_t>(eig.eigenvalues.size()));
  for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
    double lambda = eig.eigenvalues(k);
    if (!dom.contains(lambda, tolerance::kDomain)) {
      throw Error(ErrorKind::SpectrumOutOfDomain,
                  "eigenvalue " + describe(lambda) + " outside the domain of " + f.name);
    }
    lambda = std::clamp(lambda, dom.lo, dom.hi);
    values[static_cast<std::size_t>(k)] = f(lambda);
  }
  return SymMatrix(weighted_outer_sum(eig.vectors, values));
}

SymMatrix matrix_function(const SymMatrix& h, const ScalarFunction& f) {
  return matrix_function(eig_sym(h), f);
}

SymMatrix spectral_projection(const EigenDecomposition& eig, const ClosedSet& set) {
  std::vector<double> indicator(static_cast<std::size_t>(eig.eigenvalues.size()));
  for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
    indicator[static_cast<std::size_t>(k)] = set.contains(eig.eigenvalues(k), tolerance::kMembership) ? 1.0 : 0.0;
  }
  return SymMatrix(weighted_outer_sum(eig.vectors, indicator));
}

SymMatrix spectral_projection(const SymMatrix& h, const ClosedSet& set) {
  return spectral_projection(eig_sym(h), set);
}

SymMatrix compress(const SymMatrix& h, const SubspaceProjection& m) {
  if (m.dim() != h.dim()) throw Error(ErrorKind::DimensionMismatch, "compression subspace dimension");
  const Eigen::MatrixXd c = m.basis().transpose() * h.entries() * m.basis();
  return SymMatrix(0.5 * (c + c.transpose()));
}

double operator_norm(const SymMatrix& h) {
  const auto eig = eig_sym(h);
  return std::max(std::fabs(eig.min()), std::fabs(eig.max()));
}

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = a.rows() < a.cols() ? Eigen::MatrixXd(a * a.transpose())
                                                   : Eigen::MatrixXd(a.transpose() * a);
  const auto eig = eig_sym(SymMatrix(0.5 * (gram + gram.transpose())));
  return std::sqrt(std::max(0.0, eig.max()));
}

double commutator_norm(const SymMatrix& h, const SubspaceProjection& m) {
  if (m.dim() != h.dim()) throw Error(ErrorKind::DimensionMismatch, "commutator subspace dimension");
  // PH - HP is block off-diagonal with respect to M (+) M^perp, so its norm
  // equals || (1 - P) H P || = || (1 - P) H B ||.
  const Eigen::MatrixXd hb = h.entries() * m.basis();
  const Eigen::MatrixXd leak = hb - m.basis() * (m.basis().transpose() * hb);
  return spectral_norm(leak);
}

bool is_psd(const SymMatrix& h) {
  const auto eig = eig_sym(h);
  const double norm = std::max(std::fabs(eig.min()), std::fabs(eig.max()));
  return eig.min() >= -tolerance::kPsd * std::max(1.0, norm);
}

SymMatrix direct_sum(const SymMatrix& a, const SymMatrix& b) {
  const Eigen::Index n = idx(a.dim());
  const Eigen::Index m = idx(b.dim());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + m, n + m);
  out.topLeftCorner(n, n) = a.entries();
  out.bottomRightCorner(m, m) = b.entries();
  return SymMatrix(std::move(out));
}

}  // namespace opconv
