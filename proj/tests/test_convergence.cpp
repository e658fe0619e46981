#include <doctest.h>

#include <cmath>
#include <vector>

#include "opconv/convergence.hpp"
#include "opconv/error.hpp"
#include "opconv/random_matrix.hpp"
#include "opconv/rng.hpp"

using namespace opconv;

namespace {

SymMatrix half_chord() { return SymMatrix::from_rows({{0.5, -0.5}, {-0.5, 0.5}}); }

Eigen::VectorXd unit(std::size_t dim, std::size_t i) { return Eigen::VectorXd::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(i)); }

// Dense oracle for max |u^T D v| over ordered pairs.
double weak_oracle(const Eigen::MatrixXd& d, const std::vector<Eigen::VectorXd>& vs) {
  double best = 0.0;
  for (const auto& u : vs) {
    for (const auto& v : vs) best = std::max(best, std::abs(u.dot(d * v)));
  }
  return best;
}

ErrorKind kind_of(const auto& call) {
  try {
    call();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::ParseError;
}

}  // namespace

TEST_CASE("residuals on hand-built differences") {
  const auto h = SymMatrix::zero(4);
  CHECK(weak_residual(h, h, TestVectorSet::basis(4, 4)) == 0.0);

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 4);
  d(2, 2) = 0.5;
  CHECK(weak_residual(SymMatrix(d), h, TestVectorSet::basis(4, 2)) == 0.0);

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(4, 4);
  r(0, 2) = 0.5;
  r(2, 0) = 0.5;
  const TestVectorSet t13(4, {unit(4, 0), unit(4, 2)});
  CHECK(weak_residual(SymMatrix(r), h, t13) == doctest::Approx(weak_oracle(r, t13.vectors())));
  CHECK(weak_residual(SymMatrix(r), h, t13) == doctest::Approx(0.5));
  CHECK(strong_residual(SymMatrix(r), h, TestVectorSet::basis(4, 1)) == doctest::Approx(0.5));
}

TEST_CASE("residual homogeneity and metric sanity") {
  SplitMix64 rng(21);
  for (int k = 0; k < 25; ++k) {
    const auto a = random::unit_norm_symmetric(6, rng);
    const auto b = random::unit_norm_symmetric(6, rng);
    const auto tests = TestVectorSet::standard(6, 100 + k);
    const double w = weak_residual(a, b, tests);
    const double s = strong_residual(a, b, tests);
    CHECK(w <= s + 1e-12);
    CHECK(s <= 2.0 + 1e-12);
    CHECK(strong_residual(-3.0 * a, -3.0 * b, tests) == doctest::Approx(3.0 * s));
  }
  CHECK(kind_of([] { weak_residual(SymMatrix::zero(2), SymMatrix::zero(3), TestVectorSet::basis(2, 1)); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("test vector sets") {
  const auto s = TestVectorSet::standard(40, 7);
  CHECK(s.vectors().size() == 24);
  for (const auto& v : s.vectors()) CHECK(std::abs(v.norm() - 1.0) < 1e-10);
  CHECK(TestVectorSet::standard(3, 7).vectors().size() == 11);
  CHECK_THROWS_AS(TestVectorSet(2, {Eigen::VectorXd::Ones(2)}), Error);
}

TEST_CASE("shift sequence of the half-chord matrix") {
  const auto seq = shift_construction(half_chord(), {1, 0.0, 64, 32});
  REQUIRE(seq.size() == 32);
  CHECK(seq.dim() == 65);
  const auto e1 = TestVectorSet::basis(65, 1);
  const auto first8 = TestVectorSet::basis(65, 8);
  for (std::size_t n = 1; n <= 30; ++n) {
    CHECK(strong_residual(seq.terms[n - 1], seq.target, e1) == doctest::Approx(0.5).epsilon(1e-15));
    if (n >= 8) CHECK(weak_residual(seq.terms[n - 1], seq.target, first8) == 0.0);
  }
  // V^n H e_1 = .5 e_1 - .5 e_{2+n}
  CHECK(seq.terms[2](0, 0) == 0.5);
  CHECK(seq.terms[2](0, 4) == -0.5);
  CHECK(seq.terms[2](4, 4) == 0.5);
  CHECK(seq.target(0, 0) == 0.5);
}

TEST_CASE("f on the shift sequence: |x| passes through, x^2 keeps a defect") {
  const auto seq = shift_construction(half_chord(), {1, 0.0, 64, 32});
  const auto tests = TestVectorSet::basis(65, 16);
  const auto abs_report = transfer_experiment(seq, functions::abs(), tests, {1e-8, 1e-6});
  CHECK(abs_report.f_weak.back() <= 1e-12);
  CHECK(abs_report.weak.back() <= 1e-12);
  CHECK(abs_report.verdicts.weak_ok);
  CHECK(abs_report.verdicts.f_weak_ok);
  CHECK_FALSE(abs_report.verdicts.strong_ok);
  CHECK(abs_report.verdicts.violation_candidate);

  const auto sq_report = transfer_experiment(seq, functions::square(), tests, {1e-8, 1e-6});
  CHECK(sq_report.f_weak.back() == doctest::Approx(0.25));
  CHECK_FALSE(sq_report.verdicts.f_weak_ok);
  CHECK_FALSE(sq_report.verdicts.violation_candidate);
  for (std::size_t n = 0; n < seq.size(); ++n) CHECK(sq_report.weak[n] <= sq_report.strong[n] + 1e-15);
}

TEST_CASE("shift construction preconditions") {
  CHECK(kind_of([] { shift_construction(half_chord(), {1, 0.3, 64, 32}); }) == ErrorKind::X0NotInSpectrum);
  CHECK(kind_of([] { shift_construction(half_chord(), {1, 0.0, 8, 8}); }) == ErrorKind::TruncationTooShort);
  CHECK_NOTHROW(shift_construction(half_chord(), {1, 1.0, 8, 7}));
  CHECK(kind_of([] { shift_construction(half_chord(), {2, 0.0, 64, 8}); }) == ErrorKind::BadRange);
}

TEST_CASE("shift construction commutes with f") {
  SplitMix64 rng(4);
  const auto h = random::symmetric_with_spectrum(4, -1.0, 1.0, rng);
  const double x0 = eig_sym(h).eigenvalues(1);
  const auto seq = shift_construction(h, {2, x0, 12, 10});
  const auto f = functions::exp();
  const auto fh = matrix_function(h, f);
  const auto fseq = shift_construction(fh, {2, f(x0), 12, 10});
  for (std::size_t n = 0; n < seq.size(); ++n) {
    const Eigen::MatrixXd diff = matrix_function(seq.terms[n], f).entries() - fseq.terms[n].entries();
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("2x2 counterexample for |x|") {
  const auto cx = counterexample_2x2(functions::abs(), -1.0, 1.0);
  CHECK(cx.witness.x == 0.0);
  CHECK(cx.witness.y == 1.0);
  CHECK(cx.witness.t == 0.5);
  CHECK(cx.h0(0, 0) == doctest::Approx(0.5));
  CHECK(cx.h0(0, 1) == doctest::Approx(-0.5));
  CHECK(cx.h0(1, 1) == doctest::Approx(0.5));
  CHECK(cx.jensen_defect <= 1e-12);
  CHECK(cx.commutator == doctest::Approx(0.5));
  const auto eig = eig_sym(cx.h0);
  CHECK(eig.min() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eig.max() == doctest::Approx(1.0));
}

TEST_CASE("2x2 counterexample for the hinge splice") {
  const auto cx = counterexample_2x2(functions::hinge_splice(0.25), -1.0, 1.0);
  CHECK(cx.witness.x >= -0.25 - 1e-12);
  CHECK(cx.witness.y <= 0.25 + 1e-12);
  CHECK(cx.jensen_defect <= 1e-10);
  CHECK(cx.commutator >= 0.1);
}

TEST_CASE("no counterexample for x^2") {
  CHECK(kind_of([] { counterexample_2x2(functions::square(), -1.0, 1.0); }) == ErrorKind::StrictlyConvexOnMesh);
}

TEST_CASE("constant sequence is flat and classified M") {
  SplitMix64 rng(8);
  const auto h = random::symmetric_with_spectrum(5, -1.0, 1.0, rng);
  const OperatorSequence seq(std::vector<SymMatrix>(6, h), h);
  const auto tests = TestVectorSet::standard(5, 3);
  const auto report = transfer_experiment(seq, functions::square(), tests, {});
  for (double r : report.strong) CHECK(r == 0.0);
  CHECK_FALSE(report.verdicts.violation_candidate);
  CHECK(multiplier_classify(seq, tests, 1e-6, 1e-6) == MultiplierClass::Multiplier);
  const auto kap = kaplansky_demo(seq, tests, {});
  REQUIRE(kap.phi_strong.size() == 6);
  for (double r : kap.phi_strong) CHECK(r == 0.0);
}

TEST_CASE("Kaplansky demo on a norm-convergent walk") {
  SplitMix64 rng(12);
  const auto h = random::symmetric_with_spectrum(6, -1.0, 1.0, rng);
  std::vector<SymMatrix> terms;
  for (int i = 1; i <= 64; ++i) {
    terms.push_back(h + (1.0 / i) * random::unit_norm_symmetric(6, rng));
  }
  const OperatorSequence seq(std::move(terms), h);
  const auto report = kaplansky_demo(seq, TestVectorSet::standard(6, 1), {0.05, 0.05});
  for (std::size_t i = 0; i < report.strong.size(); ++i) {
    const double bound = 1.0 / static_cast<double>(i + 1);
    CHECK(report.strong[i] <= bound + 1e-12);
    CHECK(report.f_weak[i] <= 2.0 * bound + bound * bound + 1e-12);
    CHECK(report.phi_strong[i] <= 2.0 * bound + 1e-12);
  }
  CHECK(report.verdicts.weak_ok);
  CHECK(report.verdicts.strong_ok);
  CHECK_FALSE(report.verdicts.violation_candidate);
}

TEST_CASE("Kaplansky demo on the shift counterexample keeps a bounded-transform gap") {
  const auto seq = shift_construction(half_chord(), {1, 0.0, 64, 32});
  const auto report = kaplansky_demo(seq, TestVectorSet::basis(65, 16), {});
  for (double r : report.phi_strong) CHECK(r >= 0.1);
}

TEST_CASE("multiplier classification") {
  const auto seq = shift_construction(half_chord(), {1, 0.0, 64, 32});
  const auto tests = TestVectorSet::basis(65, 16);
  CHECK(multiplier_classify(seq, tests, 1e-6, 1e-6) == MultiplierClass::QuasiMultiplier);
  CHECK(multiplier_classify(apply_function(seq, functions::abs()), tests, 1e-6, 1e-6) ==
        MultiplierClass::QuasiMultiplier);

  std::vector<SymMatrix> growing;
  for (int i = 1; i <= 8; ++i) growing.push_back(SymMatrix::diagonal({0.1 * i, 0.0}));
  const OperatorSequence divergent(std::move(growing), SymMatrix::zero(2));
  CHECK(multiplier_classify(divergent, TestVectorSet::basis(2, 2), 1e-6, 1e-6) == MultiplierClass::Neither);
  CHECK(to_string(MultiplierClass::QuasiMultiplier) == "QM");
  CHECK(to_string(MultiplierClass::Multiplier) == "M");
  CHECK(to_string(MultiplierClass::Neither) == "neither");
}

TEST_CASE("corner-algebra instance from |x|") {
  const auto inst = corner_algebra_instance(functions::abs());
  CHECK(inst.alpha == doctest::Approx(0.5));
  CHECK(inst.h.terms[0](0, 0) == doctest::Approx(0.5));
  CHECK(inst.h.terms[0](1, 1) == 0.0);
  CHECK(inst.h.target(0, 1) == doctest::Approx(-0.5));
  CHECK(inst.p.terms[0](0, 0) == 1.0);
  CHECK(inst.p.terms[0](1, 1) == 0.0);
  CHECK(inst.p.target(1, 1) == 1.0);
  CHECK(inst.chi.terms[0](0, 0) == 1.0);
  CHECK(inst.chi.target.entries().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(inst.h_block_defect <= 1e-12);
  CHECK(inst.f_h_block_defect <= 1e-12);
  CHECK(inst.chi_limit_gap == doctest::Approx(1.0));
}

TEST_CASE("convergent families reach their targets") {
  for (auto family : {ConvergentFamily::Drift, ConvergentFamily::Rotation}) {
    const auto seq = convergent_sequence(family, 6, 32, -1.0, 1.0, 77);
    const auto tests = TestVectorSet::standard(6, 77);
    CHECK(weak_residual(seq.terms.back(), seq.target, tests) <= 1e-6);
    CHECK(strong_residual(seq.terms.back(), seq.target, tests) <= 1e-6);
  }
}
