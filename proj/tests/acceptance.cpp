// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "opconv/bounds.hpp"
#include "opconv/convergence.hpp"
#include "opconv/convexity.hpp"
#include "opconv/error.hpp"
#include "opconv/random_matrix.hpp"
#include "opconv/rng.hpp"
#include "opconv/verify.hpp"

using namespace opconv;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. Affine-chord counterexample lifted to the shift sequence at L = 512.
Outcome shift_counterexample() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto f = functions::abs();
  const auto cx = counterexample_2x2(f, -1.0, 1.0);
  const double expected[2][2] = {{0.5, -0.5}, {-0.5, 0.5}};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) o.require(std::abs(cx.h0(i, j) - expected[i][j]) <= 1e-12, "H0 entries");
  }
  o.require(cx.jensen_defect <= 1e-10, "Jensen defect " + num(cx.jensen_defect));
  o.require(std::abs(cx.commutator - 0.5) <= 1e-10, "commutator " + num(cx.commutator));

  constexpr std::size_t kShiftLen = 512;
  constexpr std::size_t kSteps = kShiftLen - 1;
  const auto seq = shift_construction(cx.h0, {1, cx.witness.x, kShiftLen, kSteps});
  const auto basis16 = TestVectorSet::basis(seq.dim(), 16);
  const auto e1 = TestVectorSet::basis(seq.dim(), 1);
  double worst_weak = 0.0;
  double worst_strong = 0.0;
  for (std::size_t n = 1; n <= kSteps; ++n) {
    const auto& term = seq.terms[n - 1];
    if (n >= 16) worst_weak = std::max(worst_weak, weak_residual(term, seq.target, basis16));
    worst_strong = std::max(worst_strong, std::abs(strong_residual(term, seq.target, e1) - 0.5));
  }
  o.require(worst_weak <= 1e-12, "weak residual " + num(worst_weak));
  o.require(worst_strong <= 1e-9, "strong residual off .5 by " + num(worst_strong));
  const double elapsed = seconds_since(start);
  o.require(elapsed <= 5.0, "runtime " + num(elapsed) + " s");
  if (o.pass) {
    o.detail = "L=512 steps=511, weak<=" + num(worst_weak) + ", |strong-.5|<=" + num(worst_strong) + ", " +
               num(elapsed) + " s";
  }
  return o;
}

// 2. x^2 on the same sequence keeps an f-weak plateau of .25 against e_1.
Outcome square_plateau() {
  Outcome o;
  const auto cx = counterexample_2x2(functions::abs(), -1.0, 1.0);
  const auto seq = shift_construction(cx.h0, {1, 0.0, 64, 62});
  const auto report = transfer_experiment(seq, functions::square(), TestVectorSet::basis(seq.dim(), 1), {});
  double worst = 0.0;
  for (double r : report.f_weak) worst = std::max(worst, std::abs(r - 0.25));
  o.require(worst <= 1e-9, "plateau off .25 by " + num(worst));
  o.require(!report.verdicts.f_weak_ok && !report.verdicts.violation_candidate, "verdicts");
  if (o.pass) o.detail = "|f_weak - .25| <= " + num(worst) + " over 62 terms";
  return o;
}

// 3. Strictly convex builtins: weak and f-weak convergence force strong convergence.
Outcome positive_suite() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  constexpr std::size_t kRuns = 200;
  constexpr std::size_t kTerms = 32;
  std::size_t experiments = 0;
  double worst_strong = 0.0;
  for (const char* spec : {"square", "abspow:1.5", "exp"}) {
    const auto f = parse_function_spec(spec);
    for (std::size_t run = 0; run < kRuns; ++run) {
      const std::uint64_t seed = 1000 * run + 17;
      const std::size_t dim = 2 + run % 31;
      const auto family = run % 2 == 0 ? ConvergentFamily::Drift : ConvergentFamily::Rotation;
      const auto seq = convergent_sequence(family, dim, kTerms, -1.0, 1.0, seed);
      const auto report = transfer_experiment(seq, f, TestVectorSet::standard(dim, seed), {1e-6, 1e-3});
      ++experiments;
      o.require(report.weak.back() <= 1e-6 && report.f_weak.back() <= 1e-6,
                std::string("construction did not converge weakly for ") + spec);
      worst_strong = std::max(worst_strong, report.strong.back());
      o.require(report.strong.back() <= 1e-3, std::string("strong residual ") + num(report.strong.back()) +
                                                  " for " + spec + " run " + std::to_string(run));
    }
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed <= 60.0, "runtime " + num(elapsed) + " s");
  if (o.pass) {
    o.detail = std::to_string(experiments) + " experiments, max strong " + num(worst_strong) + ", " + num(elapsed) + " s";
  }
  return o;
}

BlockStructure random_blocks(std::size_t dim, SplitMix64& rng) {
  const std::size_t count = 1 + rng.below(std::min<std::size_t>(4, dim));
  std::vector<std::size_t> sizes(count, 1);
  for (std::size_t extra = dim - count; extra > 0; --extra) ++sizes[rng.below(count)];
  return BlockStructure(sizes);
}

// 4. Block inequalities for positive matrices.
Outcome block_inequalities() {
  Outcome o;
  constexpr std::size_t kTrials = 10000;
  double worst = 0.0;
  for (std::size_t k = 0; k < kTrials; ++k) {
    SplitMix64 rng = SplitMix64::keyed(4, k);
    const std::size_t dim = 1 + rng.below(12);
    const auto p = random::psd(dim, 1 + rng.below(dim), rng);
    const auto blocks = random_blocks(dim, rng);
    const auto v = hadamard_vector_bound(p, blocks, random::unit_vector(dim, rng));
    const auto n = block_norm_bound(p, blocks);
    worst = std::min({worst, v.slack(), n.slack()});
    o.require(v.slack() >= -1e-9, "vector bound violated at trial " + std::to_string(k));
    o.require(n.slack() >= -1e-9, "norm bound violated at trial " + std::to_string(k));
  }
  const auto ones = SymMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}});
  Eigen::VectorXd v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto eq_v = hadamard_vector_bound(ones, BlockStructure({1, 1}), v);
  const auto eq_n = block_norm_bound(ones, BlockStructure({1, 1}));
  for (double side : {eq_v.lhs, eq_v.rhs, eq_n.lhs, eq_n.rhs}) {
    o.require(std::abs(side - 2.0) <= 1e-12, "all-ones equality case gives " + num(side));
  }
  if (o.pass) o.detail = "2x10^4 checks, min slack " + num(worst) + ", equality case exact";
  return o;
}

// 5. Chord-gap scalar bound over a grid and its operator step on random H.
Outcome chord_gap() {
  Outcome o;
  std::size_t points = 0;
  for (const char* spec : {"square", "abspow:1.5", "exp"}) {
    const auto f = parse_function_spec(spec);
    for (int i = 0; i < 10; ++i) {
      const double a = -1.0 + 0.1 * i;
      for (int j = 1; j <= 10; ++j) {
        const double x = a + 0.05 * j;
        const auto norm = chord_normalize(f, a, x);
        for (int k = 1; k <= 10; ++k) {
          const double y = x + 0.07 * k;
          ++points;
          o.require(norm.gamma / norm.beta_of(y) <= (x - a) / (y - x) + 1e-9,
                    std::string("scalar bound violated for ") + spec);
        }
      }
    }
  }
  double margin = kInf;
  for (std::size_t k = 0; k < 1000; ++k) {
    SplitMix64 rng = SplitMix64::keyed(5, k);
    const auto h = random::symmetric_with_spectrum(1 + rng.below(8), -1.0, 1.0, rng);
    const double a = rng.uniform(-1.0, 0.0);
    const double x = rng.uniform(a + 0.05, 0.5);
    const double y = rng.uniform(x + 0.05, 1.0);
    const auto check = chord_gap_check(h, functions::square(), a, x, y);
    margin = std::min(margin, check.operator_margin);
    o.require(check.operator_ok() && check.scalar_ok(), "operator step failed at trial " + std::to_string(k));
  }
  if (o.pass) {
    o.detail = std::to_string(points) + " grid points, 1000 operators, min eigenvalue margin " + num(margin);
  }
  return o;
}

// 6. Derivative-gap partitions re-verified with analytic derivatives.
Outcome partitions() {
  Outcome o;
  struct Case {
    const char* spec;
    double x0;
    double x;
    double eps;
  };
  const Case cases[] = {{"square", 0.0, 1.0, 0.5},          {"square", -1.0, 1.0, 0.01},
                        {"abs", -0.5, 0.5, 0.1},            {"exp", -1.0, 1.0, 0.05},
                        {"abspow:1.5", -1.0, 1.0, 0.2},     {"hinge-splice:0.25", -1.0, 1.0, 0.1},
                        {"polyline:-1,1;0,0;0.5,0.1;1,1", -1.0, 1.0, 0.3}};
  std::size_t square_points = 0;
  std::size_t gaps = 0;
  for (const auto& c : cases) {
    const auto f = parse_function_spec(c.spec);
    const auto r = epsilon_partition(f, c.x0, c.x, c.eps);
    const auto& pts = r.partition.points;
    o.require(pts.front() == c.x0 && pts.back() == c.x, std::string("endpoints for ") + c.spec);
    for (std::size_t j = 1; j < pts.size(); ++j) {
      ++gaps;
      o.require(pts[j] > pts[j - 1], "ascent");
      const double gap = f.deriv_minus(pts[j]) - f.deriv_plus(pts[j - 1]);
      o.require(gap < c.eps, std::string("gap ") + num(gap) + " for " + c.spec);
    }
    if (std::string(c.spec) == "square" && c.eps == 0.5) square_points = pts.size();
  }
  o.require(square_points >= 2 && square_points <= 6, "x^2 partition has " + std::to_string(square_points) + " points");
  if (o.pass) o.detail = std::to_string(gaps) + " gaps verified, x^2 at eps .5 uses " + std::to_string(square_points) + " points";
  return o;
}

// 7. Jensen-defect / commutator scan.
Outcome scan() {
  Outcome o;
  const auto records = jensen_commutator_scan(functions::square(), {8, 3, 10000, 7, -1.0, 1.0});
  o.require(records.size() == 10000, "record count");
  std::size_t bad = 0;
  for (const auto& r : records) bad += (r.jensen_defect <= 1e-10 && r.commutator >= 0.1) ? 1 : 0;
  o.require(bad == 0, std::to_string(bad) + " zero-defect records with commutator >= .1");
  const auto modulus = empirical_modulus(records);
  for (std::size_t i = 1; i < modulus.size(); ++i) o.require(modulus[i].delta >= modulus[i - 1].delta, "monotonicity");

  const auto abs_records = jensen_commutator_scan(functions::abs(), {8, 3, 100, 7, -1.0, 1.0});
  bool witness = false;
  for (const auto& r : abs_records) {
    witness = witness || (r.jensen_defect <= 1e-10 && std::abs(r.commutator - 0.5) <= 1e-10);
  }
  o.require(witness, "no (<=1e-10, .5) row for |x|");
  if (o.pass) o.detail = "10^4 square records clean, modulus monotone, |x| witness present";
  return o;
}

// 8. Corner-algebra instance and multiplier classes.
Outcome corner_algebra() {
  Outcome o;
  const auto inst = corner_algebra_instance(functions::abs(), 8);
  o.require(inst.alpha == 0.5, "alpha " + num(inst.alpha));
  for (std::size_t n = 0; n < inst.h.size(); ++n) {
    o.require(inst.h.terms[n].entries() == SymMatrix::diagonal({0.5, 0.0}).entries(), "H_n block formula");
    o.require(inst.p.terms[n].entries() == SymMatrix::diagonal({1.0, 0.0}).entries(), "p_n block formula");
    o.require(inst.chi.terms[n].entries() == SymMatrix::diagonal({1.0, 0.0}).entries(), "chi_n block formula");
  }
  o.require(inst.p.target.entries() == SymMatrix::identity(2).entries(), "p at infinity");
  const double expected[2][2] = {{0.5, -0.5}, {-0.5, 0.5}};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) o.require(std::abs(inst.h.target(i, j) - expected[i][j]) <= 1e-12, "H at infinity");
  }
  o.require(inst.chi.target.entries().cwiseAbs().maxCoeff() <= 1e-12, "chi at infinity is not 0");
  o.require(inst.h_block_defect <= 1e-12 && inst.f_h_block_defect <= 1e-12, "block compatibility");

  const auto lifted = shift_construction(inst.source.h0, {1, 0.0, 64, 32});
  const auto tests = TestVectorSet::basis(lifted.dim(), 16);
  const auto h_class = multiplier_classify(lifted, tests, 1e-6, 1e-6);
  const auto fh_class = multiplier_classify(apply_function(lifted, functions::abs()), tests, 1e-6, 1e-6);
  o.require(h_class == MultiplierClass::QuasiMultiplier, "lifted h classified " + to_string(h_class));
  o.require(fh_class == MultiplierClass::QuasiMultiplier, "lifted f(h) classified " + to_string(fh_class));
  SplitMix64 rng(8);
  for (std::size_t dim : {2u, 5u, 9u}) {
    const auto h = random::symmetric_with_spectrum(dim, -1.0, 1.0, rng);
    const OperatorSequence constant(std::vector<SymMatrix>(8, h), h);
    o.require(multiplier_classify(constant, TestVectorSet::standard(dim, 3), 1e-6, 1e-6) == MultiplierClass::Multiplier,
              "constant sequence not M");
  }
  if (o.pass) o.detail = "block formulas exact, lifted h and f(h) QM-not-M, constants M";
  return o;
}

// 9. Verify summaries are byte-identical for a fixed seed.
Outcome determinism() {
  Outcome o;
  VerifyConfig config;
  config.seed = 20261016;
  const std::string a = verify_summary(config, run_verify(config)).dump(2);
  const std::string b = verify_summary(config, run_verify(config)).dump(2);
  o.require(a == b, "summaries differ");
  o.require(a.find("\"passed\": true") != std::string::npos, "verify did not pass");
  if (o.pass) o.detail = std::to_string(a.size()) + " bytes, identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"shift counterexample for |x| at L=512", shift_counterexample},
      {"x^2 f-weak plateau .25 on the shift sequence", square_plateau},
      {"strictly convex positive suite", positive_suite},
      {"block vector and norm inequalities", block_inequalities},
      {"chord-gap scalar bound and operator step", chord_gap},
      {"derivative-gap partitions", partitions},
      {"Jensen-defect / commutator scan", scan},
      {"corner-algebra instance and multiplier classes", corner_algebra},
      {"verify determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
