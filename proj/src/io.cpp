#include "qcap/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qcap::io {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

// JSON has no infinities; they travel as strings.
Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double read_number(const Json& j, const char* what) {
  if (j.is_number()) {
    const double x = j.get<double>();
    if (!std::isfinite(x)) fail(std::string(what) + " is not finite");
    return x;
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(std::string(what) + " must be a number");
}

double finite_number(const Json& j, const char* what) {
  if (!j.is_number()) fail(std::string(what) + " must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(std::string(what) + " is not finite");
  return x;
}

std::size_t count(const Json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(std::string(what) + " must be an integer");
  const auto v = j.get<long long>();
  if (v <= 0) fail(std::string(what) + " must be positive");
  return static_cast<std::size_t>(v);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

const Json& array_field(const Json& j, const char* key) {
  const Json& a = field(j, key);
  if (!a.is_array()) fail(std::string("'") + key + "' must be an array");
  return a;
}

Json entries_of(const DenseMatrix& m) {
  Json e = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) e.push_back({m(i, j).real(), m(i, j).imag()});
  }
  return e;
}

std::vector<ComplexMatrix> matrices_from(const Json& a) {
  std::vector<ComplexMatrix> out;
  for (const auto& m : a) out.push_back(matrix_from_json(m));
  return out;
}

std::vector<DensityMatrix> densities_from(const Json& a) {
  std::vector<DensityMatrix> out;
  for (const auto& m : a) out.push_back(density_from_json(m));
  return out;
}

Json components_of(const std::map<std::string, double>& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c) j[k] = number(v);
  return j;
}

}  // namespace

Json dense_to_json(const DenseMatrix& m) {
  Json j;
  if (m.rows() == m.cols()) {
    j["dim"] = m.rows();
  } else {
    j["rows"] = m.rows();
    j["cols"] = m.cols();
  }
  j["entries"] = entries_of(m);
  return j;
}

Json to_json(const ComplexMatrix& m) { return dense_to_json(m.mat()); }

DenseMatrix dense_from_json(const Json& j) {
  std::size_t rows = 0, cols = 0;
  if (j.is_object() && j.contains("dim")) {
    rows = cols = count(j.at("dim"), "dim");
  } else {
    rows = count(field(j, "rows"), "rows");
    cols = count(field(j, "cols"), "cols");
  }
  const Json& e = array_field(j, "entries");
  if (e.size() != rows * cols) {
    fail("matrix needs " + std::to_string(rows * cols) + " entries, got " + std::to_string(e.size()));
  }
  DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t k = 0; k < e.size(); ++k) {
    const Json& z = e[k];
    double re = 0.0, im = 0.0;
    if (z.is_array() && z.size() == 2) {
      re = finite_number(z[0], "matrix entry");
      im = finite_number(z[1], "matrix entry");
    } else {
      re = finite_number(z, "matrix entry");
    }
    m(static_cast<Eigen::Index>(k / cols), static_cast<Eigen::Index>(k % cols)) = Complex(re, im);
  }
  return m;
}

ComplexMatrix matrix_from_json(const Json& j) {
  DenseMatrix m = dense_from_json(j);
  if (m.rows() != m.cols()) fail("expected a square matrix");
  return ComplexMatrix(std::move(m));
}

DensityMatrix density_from_json(const Json& j) { return DensityMatrix(matrix_from_json(j)); }

Json to_json(const QuantumChannel& n) {
  Json j;
  j["dim_in"] = n.base_dim_in();
  j["dim_out"] = n.base_dim_out();
  Json k = Json::array();
  for (const auto& op : n.base_kraus()) k.push_back(dense_to_json(op));
  j["kraus"] = std::move(k);
  if (n.copies() > 1) j["copies"] = n.copies();
  return j;
}

QuantumChannel channel_from_json(const Json& j) {
  if (!j.is_object()) fail("channel must be a JSON object");
  QuantumChannel base = [&] {
    if (j.contains("kraus")) {
      std::vector<DenseMatrix> kraus;
      for (const auto& op : array_field(j, "kraus")) kraus.push_back(dense_from_json(op));
      if (kraus.empty()) fail("empty Kraus list");
      QuantumChannel ch = validate_channel(std::move(kraus));
      if (j.contains("dim_in") && count(j.at("dim_in"), "dim_in") != ch.dim_in()) fail("dim_in disagrees with Kraus");
      if (j.contains("dim_out") && count(j.at("dim_out"), "dim_out") != ch.dim_out()) {
        fail("dim_out disagrees with Kraus");
      }
      return ch;
    }
    if (!j.contains("family") || !j.at("family").is_string()) fail("channel needs 'kraus' or 'family'");
    const auto family = j.at("family").get<std::string>();
    if (family == "identity") return identity_channel(count(field(j, "d"), "d"));
    if (family == "depolarizing") {
      const double p = finite_number(field(j, "p"), "p");
      if (p < 0.0 || p > 1.0) fail("depolarizing p must lie in [0, 1]");
      return depolarizing(count(field(j, "d"), "d"), p);
    }
    if (family == "constant") {
      return constant_channel(density_from_json(field(j, "sigma")), count(field(j, "dim_in"), "dim_in"));
    }
    if (family == "cq") {
      const auto signals = densities_from(array_field(j, "signals"));
      if (j.contains("povm")) {
        const Povm p(matrices_from(array_field(j, "povm")));
        return cq_channel(signals, &p);
      }
      return cq_channel(signals);
    }
    if (family == "entanglement-breaking") {
      const Povm p(matrices_from(array_field(j, "povm")));
      return entanglement_breaking(p, densities_from(array_field(j, "states")));
    }
    fail("unknown channel family '" + family + "'");
  }();
  if (j.contains("copies")) {
    const std::size_t k = count(j.at("copies"), "copies");
    if (k > 1) return channel_tensor_power(base, k);
  }
  return base;
}

Json to_json(const ClassicalQuantumCode& c) {
  Json j;
  j["n"] = c.blocklength();
  Json words = Json::array();
  if (c.is_block()) {
    for (const auto& cw : c.block_codewords()) {
      Json slots = Json::array();
      for (const auto& s : cw) slots.push_back(to_json(s.matrix()));
      words.push_back(std::move(slots));
    }
  } else {
    for (std::size_t m = 0; m < c.num_messages(); ++m) words.push_back(to_json(c.codeword(m).matrix()));
  }
  j["codewords"] = std::move(words);
  Json dec = Json::array();
  for (const auto& e : c.decoder().elements()) dec.push_back(to_json(e));
  j["decoder"] = std::move(dec);
  j["kind"] = std::string(to_string(c.kind()));
  return j;
}

ClassicalQuantumCode code_from_json(const Json& j) {
  const std::size_t n = count(field(j, "n"), "n");
  const EncoderKind kind =
      j.contains("kind") ? encoder_kind_from_string(j.at("kind").get<std::string>()) : EncoderKind::DeterministicBlock;
  Povm decoder(matrices_from(array_field(j, "decoder")));
  const Json& words = array_field(j, "codewords");
  if (kind == EncoderKind::DeterministicBlock) {
    std::vector<BlockCodeword> book;
    for (const auto& w : words) {
      if (!w.is_array()) fail("block codewords are arrays of slot states");
      book.push_back(densities_from(w));
      if (book.back().size() != n) fail("codeword length differs from n");
    }
    return ClassicalQuantumCode::block(std::move(book), std::move(decoder));
  }
  return ClassicalQuantumCode::general(n, densities_from(words), std::move(decoder), kind);
}

Json to_json(const DivergenceValue& d) {
  if (!d.is_finite()) return Json{{"infinite", true}};
  return Json{{"nats", d.value}};
}

DivergenceValue divergence_from_json(const Json& j) {
  DivergenceValue d;
  if (j.is_object() && j.contains("infinite") && j.at("infinite").is_boolean() && j.at("infinite").get<bool>()) {
    d.support_violated = true;
    d.value = std::numeric_limits<double>::infinity();
    return d;
  }
  d.value = finite_number(field(j, "nats"), "nats");
  return d;
}

Json to_json(const CapacityResult& r) {
  Json j;
  j["chi"] = number(r.chi);
  j["certificate_gap"] = number(r.certificate_gap);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  Json e;
  e["probs"] = r.ensemble.probs;
  Json states = Json::array();
  for (const auto& s : r.ensemble.states) states.push_back(to_json(s.matrix()));
  e["states"] = std::move(states);
  j["ensemble"] = std::move(e);
  j["omega_bar"] = to_json(r.omega_bar.matrix());
  j["history"] = r.history;
  return j;
}

Json to_json(const BoundReport& r) {
  Json j;
  j["name"] = r.name;
  j["lhs"] = number(r.lhs);
  j["rhs"] = number(r.rhs);
  j["slack"] = number(r.slack);
  j["holds"] = r.holds;
  j["components"] = components_of(r.components);
  if (!r.flags.empty()) j["flags"] = r.flags;
  return j;
}

Json to_json(const std::vector<BoundReport>& reports) {
  Json a = Json::array();
  for (const auto& r : reports) a.push_back(to_json(r));
  return a;
}

BoundReport report_from_json(const Json& j) {
  BoundReport r;
  r.name = field(j, "name").get<std::string>();
  r.lhs = read_number(field(j, "lhs"), "lhs");
  r.rhs = read_number(field(j, "rhs"), "rhs");
  r.slack = read_number(field(j, "slack"), "slack");
  r.holds = field(j, "holds").get<bool>();
  if (j.contains("components")) {
    for (const auto& [k, v] : j.at("components").items()) r.components[k] = read_number(v, "component");
  }
  if (j.contains("flags")) r.flags = j.at("flags").get<std::vector<std::string>>();
  return r;
}

SolverConfig solver_config_from_json(const Json& j) {
  SolverConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) fail("solver config must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "tol") {
      c.tol = finite_number(v, "tol");
    } else if (key == "max_iters") {
      c.max_iters = static_cast<int>(count(v, "max_iters"));
    } else if (key == "prune") {
      c.prune = finite_number(v, "prune");
    } else if (key == "probes") {
      c.probes = static_cast<int>(count(v, "probes"));
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !v.is_number_integer()) fail("seed must be an integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "refinements") {
      c.refinements = static_cast<int>(count(v, "refinements"));
    } else {
      fail("unknown solver field '" + key + "'");
    }
  }
  if (!(c.tol > 0.0) || c.prune < 0.0) fail("solver tol must be positive and prune non-negative");
  return c;
}

std::string reports_csv(const std::vector<BoundReport>& reports) {
  std::ostringstream out;
  out << std::setprecision(17) << "name,lhs,rhs,slack,holds\n";
  for (const auto& r : reports) out << r.name << ',' << r.lhs << ',' << r.rhs << ',' << r.slack << ',' << r.holds << '\n';
  return out.str();
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::ConfigError, "write failed for '" + path + "'");
}

}  // namespace qcap::io
