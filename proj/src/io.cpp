#include "opconv/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "opconv/error.hpp"

namespace opconv::io {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_real(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorKind::ParseError, std::string(what) + ": expected a number");
  return j.get<double>();
}

std::size_t read_dim(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
    throw Error(ErrorKind::ParseError, "expected an object with positive integer \"dim\"");
  }
  return j["dim"].get<std::size_t>();
}

json series(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(finite_or_null(v));
  return out;
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (result.ec == std::errc()) return std::string(buffer, result.ptr);
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

json matrix_to_json(const SymMatrix& h) {
  json rows = json::array();
  for (std::size_t i = 0; i < h.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < h.dim(); ++j) row.push_back(h(i, j));
    rows.push_back(std::move(row));
  }
  return {{"dim", h.dim()}, {"rows", std::move(rows)}};
}

SymMatrix matrix_from_json(const json& j) {
  const std::size_t n = read_dim(j);
  if (!j.contains("rows") || !j["rows"].is_array() || j["rows"].size() != n) {
    throw Error(ErrorKind::ParseError, "matrix \"rows\" must be an array of dim rows");
  }
  Eigen::MatrixXd m(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    const json& row = j["rows"][i];
    if (!row.is_array() || row.size() != n) throw Error(ErrorKind::ParseError, "matrix row has the wrong length");
    for (std::size_t k = 0; k < n; ++k) m(idx(i), idx(k)) = read_real(row[k], "matrix entry");
  }
  return SymMatrix(std::move(m));
}

json subspace_to_json(const SubspaceProjection& m) {
  json cols = json::array();
  for (Eigen::Index c = 0; c < m.basis().cols(); ++c) {
    json col = json::array();
    for (Eigen::Index r = 0; r < m.basis().rows(); ++r) col.push_back(m.basis()(r, c));
    cols.push_back(std::move(col));
  }
  return {{"dim", m.dim()}, {"basis_cols", std::move(cols)}};
}

SubspaceProjection subspace_from_json(const json& j) {
  const std::size_t n = read_dim(j);
  if (!j.contains("basis_cols") || !j["basis_cols"].is_array() || j["basis_cols"].empty()) {
    throw Error(ErrorKind::ParseError, "subspace \"basis_cols\" must be a non-empty array");
  }
  const json& cols = j["basis_cols"];
  Eigen::MatrixXd basis(idx(n), idx(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (!cols[c].is_array() || cols[c].size() != n) throw Error(ErrorKind::ParseError, "basis column length != dim");
    for (std::size_t r = 0; r < n; ++r) basis(idx(r), idx(c)) = read_real(cols[c][r], "basis entry");
  }
  return SubspaceProjection(std::move(basis));
}

json function_to_json(const ScalarFunction& f) {
  json params = json::object();
  for (const auto& [k, v] : f.params) params[k] = v;
  json out = {{"name", f.name},
              {"interval", json::array({finite_or_null(f.interval.lo), finite_or_null(f.interval.hi)})},
              {"params", std::move(params)}};
  if (!f.spec.empty()) out["spec"] = f.spec;
  return out;
}

json sequence_to_json(const OperatorSequence& seq) {
  json terms = json::array();
  for (const auto& t : seq.terms) terms.push_back(matrix_to_json(t));
  return {{"terms", std::move(terms)}, {"target", matrix_to_json(seq.target)}};
}

json report_to_json(const ConvergenceReport& report) {
  json params = json::object();
  for (const auto& [k, v] : report.params) params[k] = v;
  json out = {{"experiment", report.experiment},
              {"seed", report.seed},
              {"function", report.function},
              {"params", std::move(params)},
              {"thresholds", {{"weak", report.thresholds.weak}, {"strong", report.thresholds.strong}}},
              {"weak", series(report.weak)},
              {"f_weak", series(report.f_weak)},
              {"strong", series(report.strong)},
              {"verdicts",
               {{"weak_ok", report.verdicts.weak_ok},
                {"f_weak_ok", report.verdicts.f_weak_ok},
                {"strong_ok", report.verdicts.strong_ok},
                {"violation_candidate", report.verdicts.violation_candidate}}}};
  if (!report.phi_strong.empty()) out["phi_strong"] = series(report.phi_strong);
  return out;
}

std::string report_to_csv(const ConvergenceReport& report) {
  const bool with_phi = !report.phi_strong.empty();
  std::ostringstream out;
  out << "index,weak,f_weak,strong" << (with_phi ? ",phi_strong" : "") << '\n';
  for (std::size_t i = 0; i < report.weak.size(); ++i) {
    out << (i + 1) << ',' << format_real(report.weak[i]) << ',' << format_real(report.f_weak[i]) << ','
        << format_real(report.strong[i]);
    if (with_phi) out << ',' << format_real(report.phi_strong[i]);
    out << '\n';
  }
  return out.str();
}

std::string scan_to_csv(const std::vector<ScanRecord>& records) {
  std::ostringstream out;
  out << "seed,dim,m,f,jensen_defect,commutator\n";
  for (const auto& r : records) {
    out << r.seed << ',' << r.dim << ',' << r.m << ',' << r.f_name << ',' << format_real(r.jensen_defect) << ','
        << format_real(r.commutator) << '\n';
  }
  return out.str();
}

json modulus_to_json(const std::vector<ModulusRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"eps", r.eps}, {"delta", finite_or_null(r.delta)}, {"support", r.support}});
  }
  return out;
}

void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace opconv::io
