#include "opconv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "opconv/bounds.hpp"
#include "opconv/convergence.hpp"
#include "opconv/convexity.hpp"
#include "opconv/error.hpp"
#include "opconv/random_matrix.hpp"
#include "opconv/rng.hpp"
#include "opconv/spectral.hpp"

namespace opconv {

namespace {

using Eigen::MatrixXd;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

// Records the first failure only; later cases still count.
void fail(PropertyResult& r, const std::string& detail) {
  if (r.passed) r.detail = detail;
  r.passed = false;
}

void observe(PropertyResult& r, double value) {
  ++r.cases;
  r.worst = std::max(r.worst, value);
}

PropertyResult run_property(const std::string& name, const std::function<void(PropertyResult&)>& body) {
  PropertyResult r;
  r.name = name;
  try {
    body(r);
  } catch (const Error& e) {
    fail(r, e.what());
  }
  return r;
}

std::vector<ScalarFunction> strictly_convex_builtins() {
  return {functions::square(), functions::abspow(1.5), functions::exp()};
}

// Bracket [lo, hi] used for each function's random spectra and grids.
std::pair<double, double> working_bracket(const ScalarFunction& f) {
  const double lo = std::max(-2.0, f.interval.lo);
  const double hi = std::min(2.0, f.interval.hi);
  return {lo, hi};
}

int class_rank(MultiplierClass c) {
  switch (c) {
    case MultiplierClass::Neither: return 0;
    case MultiplierClass::QuasiMultiplier: return 1;
    case MultiplierClass::Multiplier: return 2;
  }
  return 0;
}

// V^n on R^(m+L) with V = 1_M (+) truncated shift, as an explicit matrix.
MatrixXd shift_power(std::size_t m, std::size_t len, std::size_t n) {
  const Eigen::Index total = idx(m + len);
  MatrixXd v = MatrixXd::Zero(total, total);
  for (std::size_t i = 0; i < m; ++i) v(idx(i), idx(i)) = 1.0;
  for (std::size_t j = 0; j + 1 < len; ++j) v(idx(m + j + 1), idx(m + j)) = 1.0;
  MatrixXd out = MatrixXd::Identity(total, total);
  for (std::size_t k = 0; k < n; ++k) out = v * out;
  return out;
}

void spectral_suites(const VerifyConfig& cfg, std::vector<PropertyResult>& out) {
  const std::size_t cases = std::max<std::size_t>(10, cfg.trials / 10);

  out.push_back(run_property("spectral.eig_reconstruction", [&](PropertyResult& r) {
    for (std::size_t k = 0; k < cases; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0x5E1, k);
      const std::size_t dim = 1 + rng.below(16);
      const SymMatrix h = random::unit_norm_symmetric(dim, rng);
      const auto eig = eig_sym(h);
      const double n = static_cast<double>(dim);
      const double recon = (eig.vectors * eig.eigenvalues.asDiagonal() * eig.vectors.transpose() - h.entries()).norm();
      const double ortho = (eig.vectors.transpose() * eig.vectors - MatrixXd::Identity(idx(dim), idx(dim))).norm();
      const bool sorted = std::is_sorted(eig.eigenvalues.data(), eig.eigenvalues.data() + eig.eigenvalues.size());
      observe(r, std::max(recon / (n * std::max(1.0, h.entries().norm())), ortho / n));
      if (recon > 1e-10 * n * std::max(1.0, h.entries().norm()) || ortho > 1e-10 * n || !sorted) {
        fail(r, "eigendecomposition invariant violated at case " + std::to_string(k));
      }
    }
  }));

  out.push_back(run_property("spectral.polynomial_homomorphism", [&](PropertyResult& r) {
    const std::vector<double> coeffs{1.0, -2.0, 0.5, 1.0};
    const auto p = functions::polynomial(coeffs);
    for (std::size_t k = 0; k < cases; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0x9017, k);
      const std::size_t dim = 1 + rng.below(16);
      const SymMatrix h = (1.0 + rng.uniform()) * random::unit_norm_symmetric(dim, rng);
      MatrixXd horner = MatrixXd::Zero(idx(dim), idx(dim));
      for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        horner = horner * h.entries() + *it * MatrixXd::Identity(idx(dim), idx(dim));
      }
      const double err = (matrix_function(h, p).entries() - horner).norm();
      const double scale = std::max(1.0, horner.norm());
      observe(r, err / scale);
      if (err > 1e-8 * scale) fail(r, "p(H) mismatch " + fmt(err));
    }
  }));

  out.push_back(run_property("spectral.projection_additivity", [&](PropertyResult& r) {
    for (std::size_t k = 0; k < cases; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0xADD, k);
      const std::size_t dim = 1 + rng.below(16);
      const SymMatrix h = random::symmetric_with_spectrum(dim, -1.0, 1.0, rng);
      const auto eig = eig_sym(h);
      std::vector<double> cuts(1 + rng.below(4));
      for (auto& c : cuts) c = rng.uniform(-1.0, 1.0);
      std::sort(cuts.begin(), cuts.end());
      // Skip draws that put an eigenvalue on a cut (closed pieces would double count it).
      bool on_cut = false;
      for (double c : cuts) {
        for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
          on_cut = on_cut || std::fabs(eig.eigenvalues(i) - c) <= 2 * tolerance::kMembership;
        }
      }
      if (on_cut) continue;
      MatrixXd sum = spectral_projection(eig, ClosedSet::at_most(cuts.front())).entries();
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        sum += spectral_projection(eig, ClosedSet::interval(cuts[i], cuts[i + 1])).entries();
      }
      sum += spectral_projection(eig, ClosedSet::at_least(cuts.back())).entries();
      const double err = (sum - MatrixXd::Identity(idx(dim), idx(dim))).norm();
      observe(r, err);
      if (err > 1e-9) fail(r, "spectral projections do not sum to 1: " + fmt(err));
    }
  }));

  out.push_back(run_property("spectral.eig_determinism", [&](PropertyResult& r) {
    for (std::size_t k = 0; k < cases; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0xDE7, k);
      const SymMatrix h = random::unit_norm_symmetric(1 + rng.below(16), rng);
      const auto a = eig_sym(h);
      const auto b = eig_sym(h);
      observe(r, 0.0);
      if (a.eigenvalues != b.eigenvalues || a.vectors != b.vectors) fail(r, "eig_sym is not bitwise deterministic");
    }
  }));

  out.push_back(run_property("spectral.invariant_compression", [&](PropertyResult& r) {
    const std::vector<ScalarFunction> fs{functions::square(), functions::abs(), functions::exp()};
    for (std::size_t k = 0; k < cases; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0x1C0, k);
      const std::size_t m = 1 + rng.below(4);
      const std::size_t rest = 1 + rng.below(4);
      const SymMatrix h = direct_sum(random::symmetric_with_spectrum(m, -1.0, 1.0, rng),
                                     random::symmetric_with_spectrum(rest, -1.0, 1.0, rng));
      const auto sub = SubspaceProjection::leading_coordinates(m + rest, m);
      if (commutator_norm(h, sub) != 0.0) fail(r, "block-diagonal operator has a nonzero commutator");
      for (const auto& f : fs) {
        const double err = (compress(matrix_function(h, f), sub) - matrix_function(compress(h, sub), f)).entries().norm();
        observe(r, err);
        if (err > 1e-8) fail(r, "pr f(H) != f(pr H) on an invariant subspace for " + f.name);
      }
    }
  }));
}

void chord_gap_grid(const ScalarFunction& f, PropertyResult& r) {
  const auto [lo, hi] = working_bracket(f);
  const double span = hi - lo;
  constexpr int kSteps = 10;
  for (int i = 0; i < kSteps; ++i) {
    const double a = lo + span * 0.5 * i / kSteps;
    for (int j = 1; j <= kSteps; ++j) {
      const double x = a + span * 0.25 * j / kSteps;
      for (int k = 1; k <= kSteps; ++k) {
        const double y = x + (hi - x) * k / (kSteps + 1);
        const ChordNormalization chord = chord_normalize(f, a, x);
        const double ga = std::fabs(chord.g(a));
        const double gx = std::fabs(chord.g(x));
        const double ratio = chord.gamma / chord.beta_of(y);
        const double bound = (x - a) / (y - x);
        observe(r, ratio - bound);
        if (ga > convexity::kChordExactness || gx > convexity::kChordExactness) {
          fail(r, "chord normalisation leaves g(a) or g(x) nonzero for " + f.name);
        }
        if (!(chord.c > a && chord.c < x && chord.gamma > 0.0)) fail(r, "minimiser not interior for " + f.name);
        if (ratio > bound + 1e-9) fail(r, "gamma/beta exceeds (x-a)/(y-x) for " + f.name);
      }
    }
  }
}

void convexity_suites(const VerifyConfig& cfg, std::vector<PropertyResult>& out) {
  for (const auto& f : strictly_convex_builtins()) {
    out.push_back(run_property("convexity.chord_gap_scalar[" + f.spec + "]",
                               [&](PropertyResult& r) { chord_gap_grid(f, r); }));
  }
  if (cfg.function_spec) {
    const auto f = parse_function_spec(*cfg.function_spec);
    out.push_back(run_property("convexity.chord_gap_scalar[" + f.spec + "]",
                               [&](PropertyResult& r) { chord_gap_grid(f, r); }));
  }

  out.push_back(run_property("convexity.partition_gaps", [&](PropertyResult& r) {
    struct Case {
      ScalarFunction f;
      double x0, x, eps;
    };
    std::vector<Case> cases{{functions::square(), 0.0, 1.0, 0.5},      {functions::square(), -1.0, 1.5, 0.01},
                            {functions::abs(), -0.5, 0.5, 0.1},        {functions::abs(), -0.3, 0.7, 0.05},
                            {functions::exp(), -1.0, 1.0, 1e-3},       {functions::abspow(1.5), 0.01, 1.0, 0.05},
                            {functions::hinge_splice(0.25), -1.0, 1.0, 0.1},
                            {parse_function_spec("polyline:-1,1;-0.2,0.1;0.3,0.2;1,2"), -0.9, 0.9, 0.05}};
    for (const auto& c : cases) {
      const auto result = epsilon_partition(c.f, c.x0, c.x, c.eps);
      for (std::size_t j = 1; j < result.partition.points.size(); ++j) {
        const double left = result.partition.points[j - 1];
        const double right = result.partition.points[j];
        const double gap = c.f.deriv_minus(right) - c.f.deriv_plus(left);
        observe(r, gap / c.eps);
        if (!(gap < c.eps)) fail(r, "partition gap " + fmt(gap) + " >= eps for " + c.f.name);
      }
    }
  }));

  out.push_back(run_property("convexity.affine_chord_detection", [&](PropertyResult& r) {
    for (const auto& f : {functions::square(), functions::exp(), functions::polynomial({0.0, 0.0, 1.0, 0.0, 1.0})}) {
      ++r.cases;
      if (find_affine_chord(f, -1.0, 1.0, 41, 1e-9)) fail(r, "affine chord reported for strictly convex " + f.name);
    }
    for (const auto& f : {functions::abs(), functions::hinge_splice(0.25), parse_function_spec("polyline:-1,1;0,0;1,0")}) {
      const auto w = find_affine_chord(f, -1.0, 1.0, 41, 1e-12);
      if (!w) {
        fail(r, "no affine chord found for " + f.name);
        continue;
      }
      observe(r, std::fabs(w->defect));
      if (std::fabs(w->defect) > 1e-12) fail(r, "non-zero witness defect for " + f.name);
    }
  }));
}

void convergence_suites(const VerifyConfig& cfg, std::vector<PropertyResult>& out) {
  const std::size_t cases = std::max<std::size_t>(10, cfg.trials / 10);

  out.push_back(run_property("convergence.metric_sanity", [&](PropertyResult& r) {
    for (std::size_t k = 0; k < cases; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0x3E7, k);
      const std::size_t dim = 1 + rng.below(12);
      const SymMatrix a = random::unit_norm_symmetric(dim, rng);
      const SymMatrix b = (2.0 * rng.uniform()) * random::unit_norm_symmetric(dim, rng);
      const auto tests = TestVectorSet::standard(dim, rng.next());
      const double weak = weak_residual(a, b, tests);
      const double strong = strong_residual(a, b, tests);
      const double cap = operator_norm(a) + operator_norm(b);
      observe(r, weak - strong);
      if (weak > strong + 1e-12 || strong > cap + 1e-12) fail(r, "weak <= strong <= ||Hi|| + ||H|| violated");
    }
  }));

  out.push_back(run_property("convergence.strictly_convex_positive", [&](PropertyResult& r) {
    const Thresholds thresholds{cfg.tol_weak, cfg.tol_strong};
    for (const auto& f : strictly_convex_builtins()) {
      const auto [lo, hi] = working_bracket(f);
      for (std::size_t k = 0; k < cfg.positive_runs; ++k) {
        const std::uint64_t seed = SplitMix64::keyed(cfg.seed ^ 0x21, k).next();
        SplitMix64 rng(seed);
        const std::size_t dim = 2 + rng.below(31);
        const auto family = k % 2 == 0 ? ConvergentFamily::Drift : ConvergentFamily::Rotation;
        const auto seq = convergent_sequence(family, dim, 32, lo, hi, seed);
        const auto report = transfer_experiment(seq, f, TestVectorSet::standard(dim, seed), thresholds);
        observe(r, report.strong.back());
        if (!report.verdicts.weak_ok || !report.verdicts.f_weak_ok) {
          fail(r, "constructed sequence missed the weak thresholds for " + f.name);
        }
        if (report.verdicts.violation_candidate) fail(r, "strong residual above threshold for " + f.name);
      }
    }
  }));

  out.push_back(run_property("convergence.counterexample_negative", [&](PropertyResult& r) {
    for (const auto& f : {functions::abs(), functions::hinge_splice(0.25)}) {
      const auto cx = counterexample_2x2(f, -1.0, 1.0);
      ShiftParams params;
      params.m = 1;
      params.x0 = cx.witness.x;
      params.shift_len = 64;
      params.steps = 48;
      const auto seq = shift_construction(cx.h0, params);
      const auto report = transfer_experiment(seq, f, TestVectorSet::basis(seq.dim(), 16), {1e-8, 1e-6});
      for (std::size_t n = 16; n <= report.weak.size(); ++n) {
        observe(r, std::max(report.weak[n - 1], report.f_weak[n - 1]));
        if (report.weak[n - 1] > 1e-8 || report.f_weak[n - 1] > 1e-8) fail(r, "weak residuals do not vanish for " + f.name);
      }
      // Against e_1 the residual is exactly the corner commutator, for every n.
      for (double s : report.strong) {
        if (s < cx.commutator - 1e-9) fail(r, "strong residual collapsed for " + f.name);
      }
      if (!report.verdicts.violation_candidate) fail(r, "violation pattern missing for " + f.name);
    }
  }));

  out.push_back(run_property("convergence.shift_identity", [&](PropertyResult& r) {
    std::vector<ScalarFunction> fs{functions::square(), functions::abs(), functions::exp(), functions::abspow(1.5),
                                   functions::hinge_splice(0.25)};
    std::vector<SymMatrix> hs{counterexample_2x2(functions::abs(), -1.0, 1.0).h0};
    SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0x5F7, 0);
    hs.push_back(random::symmetric_with_spectrum(3, -1.0, 1.0, rng));
    for (const auto& h : hs) {
      const std::size_t m = 1;
      const std::size_t len = 10;
      const double x0 = eig_sym(h).max();
      const auto seq = shift_construction(h, {m, x0, len, m + len - h.dim()});
      const std::size_t total = m + len;
      MatrixXd padded = x0 * MatrixXd::Identity(idx(total), idx(total));
      padded.topLeftCorner(idx(h.dim()), idx(h.dim())) = h.entries();
      const SymMatrix h_tilde(padded);
      for (const auto& f : fs) {
        const MatrixXd f_tilde = matrix_function(h_tilde, f).entries();
        for (std::size_t n = 1; n <= seq.size(); ++n) {
          const MatrixXd vn = shift_power(m, len, n);
          const MatrixXd range = vn * vn.transpose();
          const MatrixXd expected =
              vn * f_tilde * vn.transpose() + f(x0) * (MatrixXd::Identity(idx(total), idx(total)) - range);
          const double err = (matrix_function(seq.terms[n - 1], f).entries() - expected).cwiseAbs().maxCoeff();
          observe(r, err);
          if (err > 1e-9) fail(r, "f(V^n H V*^n + x0(1 - V^n V*^n)) identity fails for " + f.name);
        }
      }
    }
  }));

  out.push_back(run_property("convergence.multiplier_monotonicity", [&](PropertyResult& r) {
    std::vector<OperatorSequence> seqs;
    const auto cx = counterexample_2x2(functions::abs(), -1.0, 1.0);
    seqs.push_back(shift_construction(cx.h0, {1, 0.0, 40, 32}));
    for (std::size_t k = 0; k < 4; ++k) {
      seqs.push_back(convergent_sequence(k % 2 ? ConvergentFamily::Rotation : ConvergentFamily::Drift, 6, 16, -1.0,
                                         1.0, cfg.seed + k));
    }
    const std::vector<double> ladder{1.0, 1e-1, 1e-2, 1e-4, 1e-8, 1e-12, 0.0};
    for (const auto& seq : seqs) {
      const auto tests = TestVectorSet::basis(seq.dim(), std::min<std::size_t>(16, seq.dim()));
      for (double tw : ladder) {
        int previous = 3;
        for (double ts : ladder) {
          const int rank = class_rank(multiplier_classify(seq, tests, tw, ts));
          ++r.cases;
          if (rank > previous) fail(r, "tightening tolerances promoted a sequence");
          previous = rank;
        }
      }
      for (double ts : ladder) {
        int previous = 3;
        for (double tw : ladder) {
          const int rank = class_rank(multiplier_classify(seq, tests, tw, ts));
          if (rank > previous) fail(r, "tightening tolerances promoted a sequence");
          previous = rank;
        }
      }
    }
  }));
}

std::vector<std::size_t> random_blocks(std::size_t dim, SplitMix64& rng) {
  const std::size_t count = 1 + rng.below(std::min<std::size_t>(4, dim));
  std::vector<std::size_t> sizes(count, 1);
  for (std::size_t extra = dim - count; extra > 0; --extra) ++sizes[rng.below(count)];
  return sizes;
}

void bounds_suites(const VerifyConfig& cfg, std::vector<PropertyResult>& out) {
  out.push_back(run_property("bounds.block_vector", [&](PropertyResult& r) {
    for (std::size_t k = 0; k < cfg.trials; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0x111, k);
      const std::size_t dim = 1 + rng.below(12);
      const SymMatrix p = random::psd(dim, 1 + rng.below(dim), rng);
      const BlockStructure blocks(random_blocks(dim, rng));
      const auto b = hadamard_vector_bound(p, blocks, random::unit_vector(dim, rng));
      observe(r, -b.slack());
      if (b.slack() < -1e-9) fail(r, "(Pv,v) exceeds the block sum at trial " + std::to_string(k));
    }
  }));

  out.push_back(run_property("bounds.block_norm", [&](PropertyResult& r) {
    for (std::size_t k = 0; k < cfg.trials; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0x112, k);
      const std::size_t dim = 1 + rng.below(12);
      const SymMatrix p = random::psd(dim, 1 + rng.below(dim), rng);
      const BlockStructure blocks(random_blocks(dim, rng));
      const auto b = block_norm_bound(p, blocks);
      observe(r, -b.slack());
      if (b.slack() < -1e-9) fail(r, "||P|| exceeds the block-norm sum at trial " + std::to_string(k));
    }
  }));

  out.push_back(run_property("bounds.chord_gap_operator", [&](PropertyResult& r) {
    for (std::size_t k = 0; k < cfg.trials; ++k) {
      SplitMix64 rng = SplitMix64::keyed(cfg.seed ^ 0x222, k);
      const auto fs = strictly_convex_builtins();
      const auto& f = fs[k % fs.size()];
      const auto [lo, hi] = working_bracket(f);
      double pts[3];
      for (double& p : pts) p = rng.uniform(lo, hi);
      std::sort(std::begin(pts), std::end(pts));
      if (!(pts[0] < pts[1] && pts[1] < pts[2])) continue;
      const SymMatrix h = random::symmetric_with_spectrum(1 + rng.below(8), lo, hi, rng);
      const auto check = chord_gap_check(h, f, pts[0], pts[1], pts[2]);
      observe(r, std::max(-check.operator_margin, check.lhs));
      if (!check.operator_ok() || !check.scalar_ok() || check.lhs > 1e-9) {
        fail(r, "chord-gap check failed for " + f.name + " at trial " + std::to_string(k));
      }
    }
  }));

  out.push_back(run_property("bounds.jensen_commutator_scan", [&](PropertyResult& r) {
    for (const auto& f : strictly_convex_builtins()) {
      ScanSettings settings;
      settings.dim = 8;
      settings.m = 3;
      settings.trials = cfg.trials;
      settings.seed = cfg.seed;
      const auto records = jensen_commutator_scan(f, settings);
      for (const auto& rec : records) {
        ++r.cases;
        if (rec.jensen_defect <= cfg.tol_jensen && rec.commutator >= 0.1) {
          fail(r, "zero-defect record with commutator " + fmt(rec.commutator) + " for " + f.name);
        }
      }
      const auto rows = empirical_modulus(records);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].delta < rows[i - 1].delta) fail(r, "empirical modulus is not monotone for " + f.name);
      }
    }
  }));
}

}  // namespace

const char* version_string() { return "opconv " OPCONV_VERSION; }

std::vector<PropertyResult> run_verify(const VerifyConfig& config) {
  std::vector<PropertyResult> results;
  spectral_suites(config, results);
  convexity_suites(config, results);
  convergence_suites(config, results);
  bounds_suites(config, results);
  return results;
}

nlohmann::json verify_summary(const VerifyConfig& config, const std::vector<PropertyResult>& results) {
  nlohmann::json props = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    props.push_back({{"name", r.name},
                     {"passed", r.passed},
                     {"cases", r.cases},
                     {"worst", std::isfinite(r.worst) ? nlohmann::json(r.worst) : nlohmann::json(nullptr)},
                     {"detail", r.detail}});
  }
  return {{"version", version_string()},
          {"command", "verify"},
          {"seed", config.seed},
          {"config",
           {{"trials", config.trials},
            {"positive_runs", config.positive_runs},
            {"function", config.function_spec ? nlohmann::json(*config.function_spec) : nlohmann::json(nullptr)},
            {"tolw", config.tol_weak},
            {"tols", config.tol_strong},
            {"tolj", config.tol_jensen}}},
          {"properties", std::move(props)},
          {"passed", all}};
}

}  // namespace opconv
