#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "opconv/bounds.hpp"
#include "opconv/convergence.hpp"
#include "opconv/scalar_function.hpp"
#include "opconv/spectral.hpp"

namespace opconv::io {

using nlohmann::json;

// {"dim": n, "rows": [[...], ...]}
json matrix_to_json(const SymMatrix& h);
SymMatrix matrix_from_json(const json& j);

// {"dim": n, "basis_cols": [[...], ...]}; each inner array is one column.
json subspace_to_json(const SubspaceProjection& m);
SubspaceProjection subspace_from_json(const json& j);

// {"name": ..., "interval": [lo, hi], "params": {...}}; infinite ends are null.
json function_to_json(const ScalarFunction& f);

json sequence_to_json(const OperatorSequence& seq);

json report_to_json(const ConvergenceReport& report);
// index,weak,f_weak,strong[,phi_strong]
std::string report_to_csv(const ConvergenceReport& report);

// seed,dim,m,f,jensen_defect,commutator
std::string scan_to_csv(const std::vector<ScanRecord>& records);
json modulus_to_json(const std::vector<ModulusRow>& rows);

// Shortest decimal that reads back to the same double (%.17g fallback).
std::string format_real(double value);

// Writes to `path + ".tmp"` and renames over `path`.
void write_atomically(const std::string& path, const std::string& content);

}  // namespace opconv::io
