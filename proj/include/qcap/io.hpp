#pragma once

// JSON and CSV forms of matrices, channels, codes, capacity results and bound
// reports. Readers throw ParseError on malformed input and reject non-finite
// numbers.

#include <json.hpp>
#include <string>
#include <vector>

#include "qcap/bounds.hpp"
#include "qcap/capacity.hpp"
#include "qcap/codes.hpp"
#include "qcap/entropy.hpp"

namespace qcap::io {

using Json = nlohmann::ordered_json;

/// {"dim": n, "entries": [[re, im], ...]} row-major.
Json to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);
/// Rectangular form {"rows", "cols", "entries"}; the square form is accepted too.
Json dense_to_json(const DenseMatrix& m);
DenseMatrix dense_from_json(const Json& j);
DensityMatrix density_from_json(const Json& j);

/// {"dim_in", "dim_out", "kraus": [...]} from the base Kraus set, plus
/// "copies" for a tensor power.
Json to_json(const QuantumChannel& n);
/// Kraus form, or a family: {"family": "identity"|"depolarizing"|"constant"|"cq"|
/// "entanglement-breaking", ...}; an optional "copies" k gives N^(x)k.
QuantumChannel channel_from_json(const Json& j);

/// {"n", "codewords": [[matrix, ...], ...], "decoder": [matrix, ...], "kind"}.
/// Non-block kinds hold one matrix per codeword on the n-fold space.
Json to_json(const ClassicalQuantumCode& c);
ClassicalQuantumCode code_from_json(const Json& j);

/// {"nats": x} or {"infinite": true}
Json to_json(const DivergenceValue& d);
DivergenceValue divergence_from_json(const Json& j);

Json to_json(const CapacityResult& r);
Json to_json(const BoundReport& r);
Json to_json(const std::vector<BoundReport>& reports);
BoundReport report_from_json(const Json& j);

/// Missing fields keep their defaults.
SolverConfig solver_config_from_json(const Json& j);

/// One row per report: name,lhs,rhs,slack,holds
std::string reports_csv(const std::vector<BoundReport>& reports);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qcap::io
