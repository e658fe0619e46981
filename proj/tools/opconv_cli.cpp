// Command-line front end: verify | counterexample | scan | partition | shift-demo | corner-algebra.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "opconv/bounds.hpp"
#include "opconv/convergence.hpp"
#include "opconv/convexity.hpp"
#include "opconv/error.hpp"
#include "opconv/io.hpp"
#include "opconv/scalar_function.hpp"
#include "opconv/spectral.hpp"
#include "opconv/verify.hpp"

namespace {

using namespace opconv;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitPropertyFailure = 3;

struct RunConfig {
  std::string command;
  std::string function_spec;
  std::size_t dim = 8;
  std::size_t m = 1;
  std::size_t shift_len = 64;
  std::size_t steps = 32;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  double tol_weak = 1e-6;
  double tol_strong = 1e-6;
  double tol_jensen = 1e-10;
  double lo = -1.0;
  double hi = 1.0;
  std::optional<double> x0;
  double x = 1.0;
  double eps = 0.5;
  std::string matrix_path;
  std::string out;
  std::string format = "json";
};

json config_echo(const RunConfig& c) {
  json out = {{"command", c.command}, {"f", c.function_spec}, {"dim", c.dim},     {"m", c.m},
              {"shift_len", c.shift_len}, {"steps", c.steps}, {"trials", c.trials}, {"seed", c.seed},
              {"tolw", c.tol_weak},  {"tols", c.tol_strong}, {"tolj", c.tol_jensen}, {"lo", c.lo},
              {"hi", c.hi},          {"format", c.format}};
  if (c.x0) out["x0"] = *c.x0;
  if (c.command == "partition") {
    out["x"] = c.x;
    out["eps"] = c.eps;
  }
  if (!c.matrix_path.empty()) out["matrix"] = c.matrix_path;
  return out;
}

json envelope(const RunConfig& c) {
  return {{"version", version_string()}, {"command", c.command}, {"seed", c.seed}, {"config", config_echo(c)}};
}

void emit(const RunConfig& c, const std::string& content) {
  if (c.out.empty()) {
    std::cout << content;
  } else {
    io::write_atomically(c.out, content);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_verify(const RunConfig& c) {
  VerifyConfig vc;
  vc.seed = c.seed;
  vc.trials = c.trials;
  if (!c.function_spec.empty()) vc.function_spec = c.function_spec;
  vc.tol_weak = c.tol_weak;
  vc.tol_strong = c.tol_strong;
  vc.tol_jensen = c.tol_jensen;
  const auto results = run_verify(vc);
  json summary = verify_summary(vc, results);
  summary["config"] = config_echo(c);
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "property,passed,cases,worst\n";
    for (const auto& r : results) {
      csv << r.name << ',' << (r.passed ? 1 : 0) << ',' << r.cases << ',' << io::format_real(r.worst) << '\n';
    }
    emit(c, csv.str());
  } else {
    emit(c, dump(summary));
  }
  bool ok = true;
  for (const auto& r : results) {
    if (!r.passed) {
      ok = false;
      std::cerr << "property failed: " << r.name << ": " << r.detail << '\n';
    }
  }
  return ok ? kExitOk : kExitPropertyFailure;
}

int cmd_counterexample(const RunConfig& c) {
  const auto f = parse_function_spec(c.function_spec.empty() ? "abs" : c.function_spec);
  const auto cx = counterexample_2x2(f, c.lo, c.hi);
  ShiftParams params{1, c.x0.value_or(cx.witness.x), c.shift_len, c.steps};
  const auto seq = shift_construction(cx.h0, params);
  const auto basis = TestVectorSet::basis(seq.dim(), std::min<std::size_t>(16, seq.dim()));
  auto report = transfer_experiment(seq, f, basis, {c.tol_weak, c.tol_strong});
  report.experiment = "counterexample";
  report.seed = c.seed;
  report.params["shift_len"] = static_cast<double>(c.shift_len);
  report.params["x0"] = params.x0;

  if (c.format == "csv") {
    emit(c, io::report_to_csv(report));
    return kExitOk;
  }
  const auto e1 = TestVectorSet::basis(seq.dim(), 1);
  json strong_e1 = json::array();
  for (const auto& term : seq.terms) strong_e1.push_back(strong_residual(term, seq.target, e1));

  json out = envelope(c);
  out["function"] = io::function_to_json(f);
  out["witness"] = {{"x", cx.witness.x}, {"y", cx.witness.y}, {"t", cx.witness.t}, {"defect", cx.witness.defect}};
  out["H0"] = io::matrix_to_json(cx.h0);
  out["jensen_defect"] = cx.jensen_defect;
  out["commutator"] = cx.commutator;
  out["report"] = io::report_to_json(report);
  out["strong_e1"] = std::move(strong_e1);
  emit(c, dump(out));
  return kExitOk;
}

int cmd_scan(const RunConfig& c) {
  const auto f = parse_function_spec(c.function_spec.empty() ? "square" : c.function_spec);
  ScanSettings settings{c.dim, c.m, c.trials, c.seed, c.lo, c.hi};
  const auto records = jensen_commutator_scan(f, settings);
  const auto modulus = empirical_modulus(records);

  json flagged = json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].jensen_defect <= c.tol_jensen && records[i].commutator >= 0.1) {
      flagged.push_back({{"row", i},
                         {"probe", records[i].probe},
                         {"jensen_defect", records[i].jensen_defect},
                         {"commutator", records[i].commutator}});
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < modulus.size(); ++i) monotone = monotone && modulus[i].delta >= modulus[i - 1].delta;

  json summary = envelope(c);
  summary["function"] = io::function_to_json(f);
  summary["records"] = records.size();
  summary["modulus"] = io::modulus_to_json(modulus);
  summary["modulus_monotone"] = monotone;
  summary["flagged"] = std::move(flagged);

  if (c.format == "csv") {
    emit(c, io::scan_to_csv(records));
    if (!c.out.empty()) io::write_atomically(c.out + ".summary.json", dump(summary));
  } else {
    summary["csv"] = io::scan_to_csv(records);
    emit(c, dump(summary));
  }
  return kExitOk;
}

int cmd_partition(const RunConfig& c) {
  const auto f = parse_function_spec(c.function_spec.empty() ? "square" : c.function_spec);
  const double x0 = c.x0.value_or(0.0);
  const auto result = epsilon_partition(f, x0, c.x, c.eps);
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "j,left,right,gap\n";
    for (std::size_t j = 0; j < result.gaps.size(); ++j) {
      csv << (j + 1) << ',' << io::format_real(result.gaps[j].left) << ',' << io::format_real(result.gaps[j].right)
          << ',' << io::format_real(result.gaps[j].gap) << '\n';
    }
    emit(c, csv.str());
    return kExitOk;
  }
  json gaps = json::array();
  for (const auto& g : result.gaps) gaps.push_back({{"left", g.left}, {"right", g.right}, {"gap", g.gap}});
  json out = envelope(c);
  out["function"] = io::function_to_json(f);
  out["points"] = result.partition.points;
  out["kinks"] = result.kinks;
  out["gaps"] = std::move(gaps);
  out["verified"] = true;
  emit(c, dump(out));
  return kExitOk;
}

int cmd_shift_demo(const RunConfig& c) {
  const auto f = parse_function_spec(c.function_spec.empty() ? "abs" : c.function_spec);
  std::optional<SymMatrix> h;
  if (!c.matrix_path.empty()) {
    std::ifstream in(c.matrix_path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot read " + c.matrix_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, std::string("matrix file: ") + e.what());
    }
    h = io::matrix_from_json(j);
  } else {
    h = counterexample_2x2(f, c.lo, c.hi).h0;
  }
  const double x0 = c.x0.value_or(eig_sym(*h).min());
  const auto seq = shift_construction(*h, {c.m, x0, c.shift_len, c.steps});
  const auto tests = TestVectorSet::basis(seq.dim(), std::min<std::size_t>(16, seq.dim()));
  auto thm = transfer_experiment(seq, f, tests, {c.tol_weak, c.tol_strong});
  auto kap = kaplansky_demo(seq, tests, {c.tol_weak, c.tol_strong});
  thm.seed = kap.seed = c.seed;

  if (c.format == "csv") {
    emit(c, io::report_to_csv(thm));
    return kExitOk;
  }
  json out = envelope(c);
  out["function"] = io::function_to_json(f);
  out["H"] = io::matrix_to_json(*h);
  out["x0"] = x0;
  out["target"] = io::matrix_to_json(compress(*h, SubspaceProjection::leading_coordinates(h->dim(), c.m)));
  out["transfer"] = io::report_to_json(thm);
  out["kaplansky"] = io::report_to_json(kap);
  out["classification"] = to_string(multiplier_classify(seq, tests, c.tol_weak, c.tol_strong));
  emit(c, dump(out));
  return kExitOk;
}

int cmd_corner_algebra(const RunConfig& c) {
  const auto f = parse_function_spec(c.function_spec.empty() ? "abs" : c.function_spec);
  const auto inst = corner_algebra_instance(f, c.steps, c.lo, c.hi);

  const auto lifted = shift_construction(inst.source.h0, {1, inst.source.witness.x, c.shift_len, c.steps});
  const auto tests = TestVectorSet::basis(lifted.dim(), std::min<std::size_t>(16, lifted.dim()));
  const auto h_class = multiplier_classify(lifted, tests, c.tol_weak, c.tol_strong);
  const auto fh_class = multiplier_classify(apply_function(lifted, f), tests, c.tol_weak, c.tol_strong);
  const OperatorSequence constant(std::vector<SymMatrix>(c.steps, inst.source.h0), inst.source.h0);
  const auto const_class = multiplier_classify(constant, TestVectorSet::basis(2, 2), c.tol_weak, c.tol_strong);

  if (c.format == "csv") {
    std::ostringstream csv;
    csv << "quantity,value\n"
        << "alpha," << io::format_real(inst.alpha) << '\n'
        << "h_block_defect," << io::format_real(inst.h_block_defect) << '\n'
        << "f_h_block_defect," << io::format_real(inst.f_h_block_defect) << '\n'
        << "chi_limit_gap," << io::format_real(inst.chi_limit_gap) << '\n';
    emit(c, csv.str());
    return kExitOk;
  }
  json out = envelope(c);
  out["function"] = io::function_to_json(f);
  out["alpha"] = inst.alpha;
  out["H"] = io::matrix_to_json(inst.source.h0);
  out["h"] = io::sequence_to_json(inst.h);
  out["p"] = io::sequence_to_json(inst.p);
  out["f_h"] = io::sequence_to_json(inst.f_h);
  out["chi_alpha_h"] = io::sequence_to_json(inst.chi);
  out["checks"] = {{"h_block_defect", inst.h_block_defect},
                   {"f_h_block_defect", inst.f_h_block_defect},
                   {"chi_limit_gap", inst.chi_limit_gap},
                   {"chi_not_closed", inst.chi_limit_gap > 0.5}};
  out["classification"] = {{"lifted_h", to_string(h_class)},
                           {"lifted_f_h", to_string(fh_class)},
                           {"constant", to_string(const_class)}};
  emit(c, dump(out));
  return kExitOk;
}

void add_common_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--f", c.function_spec, "function spec: square|abs|exp|abspow:p|hinge-splice:w|polyline:x,y;...");
  sub->add_option("--dim", c.dim, "dimension")->check(CLI::PositiveNumber);
  sub->add_option("--m", c.m, "subspace dimension")->check(CLI::PositiveNumber);
  sub->add_option("--shift-len", c.shift_len, "truncated shift length L")->check(CLI::PositiveNumber);
  sub->add_option("--steps", c.steps, "number of sequence terms")->check(CLI::PositiveNumber);
  sub->add_option("--trials", c.trials, "randomized trials")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "64-bit seed (OPCONV_SEED overrides)");
  sub->add_option("--tolw", c.tol_weak, "weak threshold")->check(CLI::NonNegativeNumber);
  sub->add_option("--tols", c.tol_strong, "strong threshold")->check(CLI::NonNegativeNumber);
  sub->add_option("--tolj", c.tol_jensen, "Jensen-defect threshold")->check(CLI::NonNegativeNumber);
  sub->add_option("--lo", c.lo, "lower end of the working bracket");
  sub->add_option("--hi", c.hi, "upper end of the working bracket");
  sub->add_option("--out", c.out, "output path (atomic write); stdout when omitted");
  sub->add_option("--format", c.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opconv: weak-to-strong operator convergence laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  RunConfig config;
  std::optional<double> x0;
  auto* verify = app.add_subcommand("verify", "run every invariant suite");
  auto* counter = app.add_subcommand("counterexample", "affine-chord counterexample lifted to a shift sequence");
  auto* scan = app.add_subcommand("scan", "Jensen-defect / commutator scan");
  auto* partition = app.add_subcommand("partition", "derivative-gap partition");
  auto* shift = app.add_subcommand("shift-demo", "shift construction on a given operator");
  auto* corner = app.add_subcommand("corner-algebra", "sequence-algebra instance with a non-closed spectral projection");
  corner->alias("prop38");
  for (auto* sub : {verify, counter, scan, partition, shift, corner}) add_common_flags(sub, config);
  for (auto* sub : {counter, partition, shift}) sub->add_option("--x0", x0, "left partition point / padding value");
  partition->add_option("--x", config.x, "right partition point");
  partition->add_option("--eps", config.eps, "derivative-gap bound")->check(CLI::PositiveNumber);
  shift->add_option("--matrix", config.matrix_path, "operator in {\"dim\", \"rows\"} JSON");

  // The scan defaults follow the usual dim 8 / m 3 setting.
  scan->preparse_callback([&](std::size_t) { config.m = 3; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  config.x0 = x0;

  if (const char* env = std::getenv("OPCONV_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      config.seed = std::stoull(env, &used, 0);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      std::cerr << "OPCONV_SEED is not a 64-bit integer: " << env << '\n';
      return kExitValidation;
    }
  }

  try {
    if (verify->parsed()) {
      config.command = "verify";
      return cmd_verify(config);
    }
    if (counter->parsed()) {
      config.command = "counterexample";
      return cmd_counterexample(config);
    }
    if (scan->parsed()) {
      config.command = "scan";
      return cmd_scan(config);
    }
    if (partition->parsed()) {
      config.command = "partition";
      return cmd_partition(config);
    }
    if (shift->parsed()) {
      config.command = "shift-demo";
      return cmd_shift_demo(config);
    }
    config.command = "corner-algebra";
    return cmd_corner_algebra(config);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::StrictlyConvexOnMesh) {
      std::cerr << "no affine chord: " << e.what() << '\n';
    } else {
      std::cerr << "error: " << e.what() << '\n';
    }
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
