#include "opconv/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "opconv/error.hpp"
#include "opconv/random_matrix.hpp"
#include "opconv/rng.hpp"

namespace opconv {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// (A - B) v, touching only the columns where v is nonzero.
Eigen::VectorXd difference_times(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double vj = v(j);
    if (vj == 0.0) continue;
    out.noalias() += vj * (a.col(j) - b.col(j));
  }
  return out;
}

void require_same_dim(const SymMatrix& a, const SymMatrix& b, const TestVectorSet& tests, const char* what) {
  if (a.dim() != b.dim() || a.dim() != tests.dim()) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": operator and test-vector dimensions differ");
  }
}

struct ResidualPair {
  double weak;
  double strong;
};

ResidualPair residuals(const SymMatrix& hi, const SymMatrix& h, const TestVectorSet& tests) {
  std::vector<Eigen::VectorXd> images;
  images.reserve(tests.vectors().size());
  ResidualPair out{0.0, 0.0};
  for (const auto& v : tests.vectors()) {
    images.push_back(difference_times(hi.entries(), h.entries(), v));
    out.strong = std::max(out.strong, images.back().norm());
  }
  for (const auto& u : tests.vectors()) {
    for (const auto& image : images) out.weak = std::max(out.weak, std::fabs(u.dot(image)));
  }
  return out;
}

std::size_t tail_start(std::size_t n) { return n - (n + 3) / 4; }

ConvergenceReport run_experiment(const std::string& name, const OperatorSequence& seq, const ScalarFunction& f,
                                 const TestVectorSet& tests, const Thresholds& thresholds,
                                 const ScalarFunction* bounded) {
  if (tests.dim() != seq.dim()) throw Error(ErrorKind::DimensionMismatch, name + ": test vectors vs sequence");
  ConvergenceReport report;
  report.experiment = name;
  report.function = f.spec.empty() ? f.name : f.spec;
  report.thresholds = thresholds;
  report.params["dim"] = static_cast<double>(seq.dim());
  report.params["terms"] = static_cast<double>(seq.size());
  report.params["test_vectors"] = static_cast<double>(tests.vectors().size());

  const auto target_eig = eig_sym(seq.target);
  const SymMatrix f_target = matrix_function(target_eig, f);
  std::optional<SymMatrix> phi_target;
  if (bounded) phi_target = matrix_function(target_eig, *bounded);

  for (const auto& term : seq.terms) {
    const auto plain = residuals(term, seq.target, tests);
    report.weak.push_back(plain.weak);
    report.strong.push_back(plain.strong);
    const auto eig = eig_sym(term);
    report.f_weak.push_back(residuals(matrix_function(eig, f), f_target, tests).weak);
    if (bounded) report.phi_strong.push_back(residuals(matrix_function(eig, *bounded), *phi_target, tests).strong);
  }

  auto& v = report.verdicts;
  v.weak_ok = report.weak.back() <= thresholds.weak;
  v.f_weak_ok = report.f_weak.back() <= thresholds.weak;
  v.strong_ok = report.strong.back() <= thresholds.strong;
  v.violation_candidate = v.weak_ok && v.f_weak_ok && !v.strong_ok;
  return report;
}

}  // namespace

OperatorSequence::OperatorSequence(std::vector<SymMatrix> terms_in, SymMatrix target_in)
    : terms(std::move(terms_in)), target(std::move(target_in)) {
  if (terms.empty()) throw Error(ErrorKind::BadRange, "operator sequence needs at least one term");
  for (const auto& t : terms) {
    if (t.dim() != target.dim()) throw Error(ErrorKind::DimensionMismatch, "operator sequence terms differ in dimension");
  }
}

TestVectorSet::TestVectorSet(std::size_t dim, std::vector<Eigen::VectorXd> vectors)
    : dim_(dim), vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw Error(ErrorKind::BadRange, "test vector set must be non-empty");
  for (const auto& v : vectors_) {
    if (static_cast<std::size_t>(v.size()) != dim_) throw Error(ErrorKind::DimensionMismatch, "test vector dimension");
    if (std::fabs(v.norm() - 1.0) > 1e-10) throw Error(ErrorKind::BadRange, "test vectors must have unit norm");
  }
}

TestVectorSet TestVectorSet::basis(std::size_t dim, std::size_t k) {
  if (k < 1 || k > dim) throw Error(ErrorKind::BadRange, "basis test set needs 1 <= k <= dim");
  std::vector<Eigen::VectorXd> vectors;
  for (std::size_t i = 0; i < k; ++i) vectors.push_back(Eigen::VectorXd::Unit(idx(dim), idx(i)));
  return TestVectorSet(dim, std::move(vectors));
}

TestVectorSet TestVectorSet::standard(std::size_t dim, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> vectors = basis(dim, std::min<std::size_t>(16, dim)).vectors();
  SplitMix64 rng = SplitMix64::keyed(seed, 0x7E57);
  for (int k = 0; k < 8; ++k) vectors.push_back(random::unit_vector(dim, rng));
  return TestVectorSet(dim, std::move(vectors));
}

double weak_residual(const SymMatrix& hi, const SymMatrix& h, const TestVectorSet& tests) {
  require_same_dim(hi, h, tests, "weak_residual");
  return residuals(hi, h, tests).weak;
}

double strong_residual(const SymMatrix& hi, const SymMatrix& h, const TestVectorSet& tests) {
  require_same_dim(hi, h, tests, "strong_residual");
  return residuals(hi, h, tests).strong;
}

OperatorSequence shift_construction(const SymMatrix& h, const ShiftParams& params) {
  const std::size_t d = h.dim();
  const std::size_t m = params.m;
  const std::size_t len = params.shift_len;
  if (m < 1 || m >= d) throw Error(ErrorKind::BadRange, "shift_construction needs 1 <= m < dim(H)");
  if (params.steps < 1) throw Error(ErrorKind::BadRange, "shift_construction needs steps >= 1");
  if (len < d - m || params.steps + d > m + len) {
    throw Error(ErrorKind::TruncationTooShort, "need steps + dim(H) <= m + shift_len (steps " +
                                                   std::to_string(params.steps) + ", dim " + std::to_string(d) +
                                                   ", m " + std::to_string(m) + ", L " + std::to_string(len) + ")");
  }
  const auto eig = eig_sym(h);
  double nearest = kInf;
  for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
    nearest = std::min(nearest, std::fabs(eig.eigenvalues(k) - params.x0));
  }
  if (nearest > tolerance::kMembership) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "x0 = " << params.x0 << " is at distance " << nearest << " from sigma(H)";
    throw Error(ErrorKind::X0NotInSpectrum, msg.str());
  }

  const Eigen::Index total = idx(m + len);
  std::vector<SymMatrix> terms;
  terms.reserve(params.steps);
  for (std::size_t n = 1; n <= params.steps; ++n) {
    // V^n moves tail coordinate i to i + n; range(1 - V^n V*^n) is the first n
    // tail coordinates, which keep the x0 padding.
    auto place = [&](std::size_t i) { return idx(i < m ? i : i + n); };
    Eigen::MatrixXd t = params.x0 * Eigen::MatrixXd::Identity(total, total);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) t(place(i), place(j)) = h(i, j);
    }
    terms.emplace_back(std::move(t));
  }

  Eigen::MatrixXd target = params.x0 * Eigen::MatrixXd::Identity(total, total);
  target.topLeftCorner(idx(m), idx(m)) = h.entries().topLeftCorner(idx(m), idx(m));
  return OperatorSequence(std::move(terms), SymMatrix(std::move(target)));
}

Counterexample counterexample_2x2(const ScalarFunction& f, double lo, double hi, int grid, double tol) {
  const auto witness = find_affine_chord(f, lo, hi, grid, tol);
  if (!witness) {
    throw Error(ErrorKind::StrictlyConvexOnMesh, "no affine chord of " + f.name + " found on the search mesh");
  }
  const double x = witness->x;
  const double y = witness->y;
  const double t = witness->t;
  const double s = std::sqrt(t * (1.0 - t));
  const SymMatrix h0 = SymMatrix::from_rows({{x * t + y * (1.0 - t), (x - y) * s},
                                             {(x - y) * s, x * (1.0 - t) + y * t}});

  const auto eig = eig_sym(h0);
  const double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
  if (std::fabs(eig.min() - x) > 1e-9 * scale || std::fabs(eig.max() - y) > 1e-9 * scale) {
    throw Error(ErrorKind::VerificationFailed, "counterexample spectrum differs from {x, y}");
  }
  const auto corner = SubspaceProjection::leading_coordinates(2, 1);
  const double f_of_corner = f(h0(0, 0));
  const double corner_of_f = matrix_function(eig, f)(0, 0);
  Counterexample out{h0, *witness, std::fabs(f_of_corner - corner_of_f), commutator_norm(h0, corner)};
  const double f_scale = std::max({1.0, std::fabs(f(x)), std::fabs(f(y))});
  if (out.jensen_defect > 1e-8 * f_scale) {
    throw Error(ErrorKind::VerificationFailed, "counterexample Jensen defect is not negligible");
  }
  if (!(out.commutator > 0.0)) throw Error(ErrorKind::VerificationFailed, "counterexample corner is invariant");
  return out;
}

ConvergenceReport transfer_experiment(const OperatorSequence& seq, const ScalarFunction& f,
                                       const TestVectorSet& tests, const Thresholds& thresholds) {
  return run_experiment("transfer", seq, f, tests, thresholds, nullptr);
}

ConvergenceReport kaplansky_demo(const OperatorSequence& seq, const TestVectorSet& tests,
                                 const Thresholds& thresholds) {
  const auto phi = functions::bounded_transform();
  return run_experiment("kaplansky", seq, functions::square(), tests, thresholds, &phi);
}

std::string to_string(MultiplierClass c) {
  switch (c) {
    case MultiplierClass::Multiplier: return "M";
    case MultiplierClass::QuasiMultiplier: return "QM";
    case MultiplierClass::Neither: return "neither";
  }
  return "neither";
}

MultiplierClass multiplier_classify(const OperatorSequence& seq, const TestVectorSet& tests, double tol_weak,
                                    double tol_strong) {
  if (tests.dim() != seq.dim()) throw Error(ErrorKind::DimensionMismatch, "multiplier_classify: test vectors");
  double weak = 0.0;
  double strong = 0.0;
  for (std::size_t n = tail_start(seq.size()); n < seq.size(); ++n) {
    const auto r = residuals(seq.terms[n], seq.target, tests);
    weak = std::max(weak, r.weak);
    strong = std::max(strong, r.strong);
  }
  if (!(weak <= tol_weak)) return MultiplierClass::Neither;
  return strong <= tol_strong ? MultiplierClass::Multiplier : MultiplierClass::QuasiMultiplier;
}

OperatorSequence apply_function(const OperatorSequence& seq, const ScalarFunction& f) {
  std::vector<SymMatrix> terms;
  terms.reserve(seq.size());
  for (const auto& t : seq.terms) terms.push_back(matrix_function(t, f));
  return OperatorSequence(std::move(terms), matrix_function(seq.target, f));
}

CornerAlgebraInstance corner_algebra_instance(const ScalarFunction& f, std::size_t finite_terms, double lo, double hi) {
  if (finite_terms < 1) throw Error(ErrorKind::BadRange, "corner_algebra_instance needs at least one finite term");
  Counterexample source = counterexample_2x2(f, lo, hi);
  const SymMatrix big_h = source.h0;
  const double alpha = big_h(0, 0);
  if (!(source.witness.x < alpha && alpha < source.witness.y)) {
    throw Error(ErrorKind::VerificationFailed, "corner entry is not strictly inside (x, y)");
  }

  const SymMatrix corner_projection = SymMatrix::diagonal({1.0, 0.0});
  const SymMatrix h_n = SymMatrix::diagonal({alpha, 0.0});
  // In the corner p_n M_2 p_n = C e_1 e_1^T, f and chi act on the scalar alpha.
  const SymMatrix f_h_n = SymMatrix::diagonal({f(alpha), 0.0});
  const SymMatrix chi_n = corner_projection;

  const auto eig = eig_sym(big_h);
  const SymMatrix f_h_inf = matrix_function(eig, f);
  const SymMatrix chi_inf = spectral_projection(eig, ClosedSet::point(alpha));

  auto repeat = [&](const SymMatrix& m) { return std::vector<SymMatrix>(finite_terms, m); };
  const Eigen::MatrixXd p = corner_projection.entries();
  const double h_defect = spectral_norm(p * big_h.entries() * p - h_n.entries());
  const double f_defect = spectral_norm(p * f_h_inf.entries() * p - f_h_n.entries());
  const double chi_gap = spectral_norm(chi_n.entries() - chi_inf.entries());

  return CornerAlgebraInstance{alpha,
                        std::move(source),
                        OperatorSequence(repeat(h_n), big_h),
                        OperatorSequence(repeat(corner_projection), SymMatrix::identity(2)),
                        OperatorSequence(repeat(f_h_n), f_h_inf),
                        OperatorSequence(repeat(chi_n), chi_inf),
                        h_defect,
                        f_defect,
                        chi_gap};
}

OperatorSequence convergent_sequence(ConvergentFamily family, std::size_t dim, std::size_t terms, double lo,
                                     double hi, std::uint64_t seed) {
  if (dim < 1 || terms < 1) throw Error(ErrorKind::BadRange, "convergent_sequence needs dim >= 1 and terms >= 1");
  SplitMix64 rng = SplitMix64::keyed(seed, 0xC0417);
  SymMatrix target = random::symmetric_with_spectrum(dim, lo, hi, rng);
  std::vector<SymMatrix> seq;
  seq.reserve(terms);

  if (family == ConvergentFamily::Drift) {
    const SymMatrix start = random::symmetric_with_spectrum(dim, lo, hi, rng);
    for (std::size_t i = 1; i <= terms; ++i) {
      const double s = std::ldexp(1.0, -static_cast<int>(i));
      seq.emplace_back((1.0 - s) * target.entries() + s * start.entries());
    }
  } else {
    if (dim < 2) throw Error(ErrorKind::BadRange, "rotation family needs dim >= 2");
    const auto p = idx(rng.below(dim));
    auto q = idx(rng.below(dim - 1));
    if (q >= p) ++q;
    const double theta0 = rng.uniform(0.5, 1.5);
    for (std::size_t i = 1; i <= terms; ++i) {
      const double theta = std::ldexp(theta0, -static_cast<int>(i));
      Eigen::MatrixXd r = Eigen::MatrixXd::Identity(idx(dim), idx(dim));
      r(p, p) = std::cos(theta);
      r(q, q) = std::cos(theta);
      r(p, q) = -std::sin(theta);
      r(q, p) = std::sin(theta);
      const Eigen::MatrixXd conj = r * target.entries() * r.transpose();
      seq.emplace_back(0.5 * (conj + conj.transpose()));
    }
  }
  return OperatorSequence(std::move(seq), std::move(target));
}

}  // namespace opconv
