#include "opconv/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "opconv/convergence.hpp"
#include "opconv/convexity.hpp"
#include "opconv/error.hpp"
#include "opconv/random_matrix.hpp"
#include "opconv/rng.hpp"

namespace opconv {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_psd(const SymMatrix& p, const BlockStructure& blocks) {
  if (p.dim() != blocks.dim()) throw Error(ErrorKind::DimensionMismatch, "block structure does not match operator");
  if (!is_psd(p)) throw Error(ErrorKind::NotPSD, "operator is not positive semidefinite");
}

double min_eigenvalue(const Eigen::MatrixXd& m) { return eig_sym(SymMatrix(0.5 * (m + m.transpose()))).min(); }

}  // namespace

BlockStructure::BlockStructure(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw Error(ErrorKind::BadRange, "block structure needs at least one block");
  for (std::size_t s : sizes_) {
    if (s == 0) throw Error(ErrorKind::BadRange, "block sizes must be positive");
    offsets_.push_back(dim_);
    dim_ += s;
  }
}

BoundPair hadamard_vector_bound(const SymMatrix& p, const BlockStructure& blocks, const Eigen::VectorXd& v) {
  require_psd(p, blocks);
  if (static_cast<std::size_t>(v.size()) != p.dim()) throw Error(ErrorKind::DimensionMismatch, "vector dimension");
  if (std::fabs(v.norm() - 1.0) > 1e-10) throw Error(ErrorKind::BadRange, "v must be a unit vector");

  BoundPair out{v.dot(p.entries() * v), 0.0};
  for (std::size_t b = 0; b < blocks.sizes().size(); ++b) {
    const Eigen::Index off = idx(blocks.offset(b));
    const Eigen::Index size = idx(blocks.sizes()[b]);
    const Eigen::VectorXd component = v.segment(off, size);
    const double weight = component.norm();
    if (weight == 0.0) continue;
    const Eigen::VectorXd u = component / weight;
    out.rhs += u.dot(p.entries().block(off, off, size, size) * u);
  }
  return out;
}

BoundPair block_norm_bound(const SymMatrix& p, const BlockStructure& blocks) {
  require_psd(p, blocks);
  BoundPair out{operator_norm(p), 0.0};
  for (std::size_t b = 0; b < blocks.sizes().size(); ++b) {
    const Eigen::Index off = idx(blocks.offset(b));
    const Eigen::Index size = idx(blocks.sizes()[b]);
    out.rhs += operator_norm(SymMatrix(p.entries().block(off, off, size, size)));
  }
  return out;
}

ChordGapCheck chord_gap_check(const SymMatrix& h, const ScalarFunction& f, double a, double x, double y) {
  if (!(a < x && x < y)) throw Error(ErrorKind::BadRange, "chord_gap_check needs a < x < y");
  if (!f.interval.contains(y)) throw Error(ErrorKind::BadRange, "y lies outside the domain of " + f.name);
  const ChordNormalization chord = chord_normalize(f, a, x);
  const double beta = chord.beta_of(y);
  if (!(beta > 0.0)) {
    throw Error(ErrorKind::NotConvexDetected, f.name + " does not rise above its chord to the right of x");
  }

  const auto eig = eig_sym(h);
  const SymMatrix g_h = matrix_function(eig, chord.g);
  const Eigen::MatrixXd lower = spectral_projection(eig, ClosedSet::interval(a, x)).entries();
  const Eigen::MatrixXd upper = spectral_projection(eig, ClosedSet::at_least(y)).entries();
  const Eigen::MatrixXd sandwich = lower * upper * lower;

  ChordGapCheck out;
  out.lhs = operator_norm(SymMatrix(0.5 * (sandwich + sandwich.transpose())));
  out.gamma = chord.gamma;
  out.beta = beta;
  out.bound_gb = chord.gamma / beta;
  out.bound_xy = (x - a) / (y - x);
  const Eigen::MatrixXd gap =
      g_h.entries() + chord.gamma * Eigen::MatrixXd::Identity(idx(h.dim()), idx(h.dim())) - beta * upper;
  out.operator_margin = min_eigenvalue(gap);
  return out;
}

double jensen_defect(const SymMatrix& h, const SubspaceProjection& m, const ScalarFunction& f) {
  const SymMatrix f_of_corner = matrix_function(compress(h, m), f);
  const SymMatrix corner_of_f = compress(matrix_function(h, f), m);
  return operator_norm(f_of_corner - corner_of_f);
}

std::vector<ScanRecord> jensen_commutator_scan(const ScalarFunction& f, const ScanSettings& settings) {
  if (settings.m < 1 || settings.m >= settings.dim) {
    throw Error(ErrorKind::BadRange, "scan needs 1 <= m < dim (m " + std::to_string(settings.m) + ", dim " +
                                         std::to_string(settings.dim) + ")");
  }
  if (!(settings.lo < settings.hi) || !f.interval.contains(settings.lo) || !f.interval.contains(settings.hi)) {
    throw Error(ErrorKind::BadRange, "scan spectrum bracket must be inside the domain of " + f.name);
  }
  // CSV-safe label: polyline specs contain commas.
  const std::string label = f.spec.empty() || f.spec.find(',') != std::string::npos ? f.name : f.spec;

  std::vector<ScanRecord> records;
  records.reserve(settings.trials + 1);
  try {
    const Counterexample probe = counterexample_2x2(f, settings.lo, settings.hi);
    records.push_back({settings.seed, 0, 2, 1, label, probe.jensen_defect, probe.commutator, true});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::StrictlyConvexOnMesh) throw;
  }

  for (std::size_t trial = 1; trial <= settings.trials; ++trial) {
    SplitMix64 rng = SplitMix64::keyed(settings.seed, trial);
    const SymMatrix h = random::symmetric_with_spectrum(settings.dim, settings.lo, settings.hi, rng);
    const SubspaceProjection m = random::subspace(settings.dim, settings.m, rng);
    records.push_back(
        {settings.seed, trial, settings.dim, settings.m, label, jensen_defect(h, m, f), commutator_norm(h, m), false});
  }
  return records;
}

std::vector<ModulusRow> empirical_modulus(const std::vector<ScanRecord>& records) {
  constexpr int kPoints = 32;
  std::vector<ModulusRow> rows;
  for (int k = 0; k < kPoints; ++k) {
    const double eps = std::pow(10.0, -4.0 + 4.0 * k / (kPoints - 1));
    ModulusRow row{eps, kInf, 0};
    for (const auto& r : records) {
      if (r.commutator >= eps) {
        row.delta = std::min(row.delta, r.jensen_defect);
        ++row.support;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace opconv
