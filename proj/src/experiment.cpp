#include "qcap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <thread>

#include "qcap/random.hpp"

namespace qcap {

namespace {

using io::Json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

constexpr double kCertificateTol = 1e-5;
constexpr double kUniquenessTol = 1e-5;

std::string resolve(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

std::vector<std::size_t> positive_list(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) config_error(std::string(what) + " must be a non-empty array");
  std::vector<std::size_t> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() <= 0) config_error(std::string(what) + " entries must be positive integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

Ensemble ensemble_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("probs") || !j.contains("states")) {
    config_error("ensemble needs 'probs' and 'states'");
  }
  Ensemble e;
  e.probs = j.at("probs").get<std::vector<double>>();
  for (const auto& s : j.at("states")) e.states.push_back(io::density_from_json(s));
  e.validate();
  return e;
}

template <class F>
void for_each_index(std::size_t count, unsigned jobs, F&& f) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(jobs, count));
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Point {
  std::size_t index = 0;
  std::size_t n = 0;
  std::size_t M = 0;       // fixed message count, 0 when taken from a rate
  double rate = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
};

struct PointResult {
  Json detail;
  SummaryRow row;
  std::size_t checks = 0;
  std::size_t failures = 0;
};

SummaryRow row_of(std::size_t n, std::size_t M, double eps_max, double eps_avg, const BoundReport& r) {
  return SummaryRow{n, M, eps_max, eps_avg, r.lhs, r.rhs, r.slack};
}

ClassicalQuantumCode basis_code(const QuantumChannel& ch, std::size_t n) {
  const std::size_t d = ch.dim_in();
  std::vector<std::size_t> dims(n, d);
  const std::size_t M = checked_product(dims, kDefaultDimensionCap);
  std::vector<BlockCodeword> book(M);
  for (std::size_t m = 0; m < M; ++m) {
    std::size_t rest = m;
    std::vector<std::size_t> digits(n);
    for (std::size_t i = n; i-- > 0;) {
      digits[i] = rest % d;
      rest /= d;
    }
    for (auto k : digits) book[m].push_back(DensityMatrix::basis_state(d, k));
  }
  std::vector<DenseMatrix> outs;
  for (const auto& cw : book) {
    std::vector<DensityMatrix> slots;
    for (const auto& s : cw) slots.push_back(apply_channel(ch, s));
    outs.push_back(tensor_product(slots).dense());
  }
  const std::vector<double> priors(M, 1.0 / static_cast<double>(M));
  return ClassicalQuantumCode::block(std::move(book), pgm_decoder(std::span<const DenseMatrix>(outs), priors));
}

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg), ch_(io::channel_from_json(cfg.channel)) {}

  ExperimentOutcome run() {
    out_.report["task"] = std::string(to_string(cfg_.task));
    out_.report["seed"] = cfg_.seed;
    out_.report["channel"] = cfg_.channel;
    switch (cfg_.task) {
      case Task::Capacity: capacity_task(); break;
      case Task::Certify: certify_task(); break;
      case Task::Uniqueness: uniqueness_task(); break;
      default: sweep_task(); break;
    }
    out_.report["checks"] = out_.checks;
    out_.report["failures"] = out_.failures;
    return std::move(out_);
  }

 private:
  const CapacityResult& capacity() {
    if (!cap_) {
      cap_ = holevo_capacity(ch_, cfg_.solver);
      if (!cap_->converged) throw Error(ErrorCode::NotConverged, "capacity solver did not certify its result");
    }
    return *cap_;
  }

  void check(bool holds) {
    ++out_.checks;
    if (!holds) ++out_.failures;
  }

  void capacity_task() {
    const CapacityResult r = holevo_capacity(ch_, cfg_.solver);
    out_.report["capacity"] = io::to_json(r);
    check(r.converged && r.certificate_gap <= kCertificateTol);
    out_.rows.push_back({1, 1, 0.0, 0.0, r.chi, r.chi + r.certificate_gap, r.certificate_gap});
  }

  void certify_task() {
    const auto& cap = capacity();
    const Certificate c = lemma2_certificate(ch_, cap.chi, cap.omega_bar, cfg_.probes, cfg_.seed);
    out_.report["capacity"] = io::to_json(cap);
    out_.report["certificate"] = Json{{"gap", c.gap}, {"max_divergence", c.max_divergence}, {"probes", cfg_.probes},
                                      {"tol", kCertificateTol}};
    check(c.gap <= kCertificateTol);
    out_.rows.push_back({1, 1, 0.0, 0.0, c.max_divergence, cap.chi, cap.chi - c.max_divergence});
  }

  void uniqueness_task() {
    const UniquenessReport u = uniqueness_probe(ch_, cfg_.restarts, cfg_.seed, cfg_.solver);
    Json chis = Json::array();
    for (const auto& r : u.runs) chis.push_back(r.chi);
    out_.report["uniqueness"] =
        Json{{"restarts", cfg_.restarts}, {"max_distance", u.max_distance}, {"chi", chis}, {"tol", kUniquenessTol}};
    check(u.max_distance <= kUniquenessTol);
    out_.rows.push_back({1, 1, 0.0, 0.0, u.max_distance, kUniquenessTol, kUniquenessTol - u.max_distance});
  }

  std::vector<Point> points() {
    std::vector<Point> pts;
    const bool basis = cfg_.code_source == CodeSource::Basis && cfg_.task != Task::ProofChain;
    const bool file = cfg_.code_source == CodeSource::File && cfg_.task != Task::ProofChain;
    if (file) {
      pts.push_back(Point{0, 0, 0, 0.0, 0, cfg_.seed});
      return pts;
    }
    for (std::size_t n : cfg_.sweep.n_values) {
      std::vector<Point> axis;
      if (basis) {
        axis.push_back(Point{0, n, 0, 0.0, 0, 0});
      } else if (!cfg_.sweep.m_values.empty()) {
        for (auto M : cfg_.sweep.m_values) axis.push_back(Point{0, n, M, 0.0, 0, 0});
      } else {
        for (auto r : cfg_.sweep.rates) axis.push_back(Point{0, n, 0, r, 0, 0});
      }
      for (auto p : axis) {
        for (std::size_t trial = 0; trial < (basis ? 1 : cfg_.sweep.trials); ++trial) {
          p.trial = trial;
          p.index = pts.size();
          p.seed = derive_seed(cfg_.seed, p.index);
          pts.push_back(p);
        }
      }
    }
    return pts;
  }

  ClassicalQuantumCode code_for(const Point& p, std::size_t& M) {
    if (cfg_.code_source == CodeSource::File) {
      auto c = io::code_from_json(*cfg_.code);
      M = c.num_messages();
      return c;
    }
    if (cfg_.code_source == CodeSource::Basis) {
      auto c = basis_code(ch_, p.n);
      M = c.num_messages();
      return c;
    }
    M = p.M != 0 ? p.M : messages_for_rate(capacity().chi, p.rate, p.n);
    const Ensemble& e = cfg_.ensemble ? *cfg_.ensemble : capacity().ensemble;
    return random_pgm_code(ch_, e, p.n, M, p.seed);
  }

  PointResult evaluate(const Point& p) {
    PointResult res;
    Json& d = res.detail;
    if (cfg_.task == Task::ProofChain) return proof_chain_point(p);
    std::size_t M = 0;
    const ClassicalQuantumCode code = code_for(p, M);
    const std::size_t n = code.blocklength();
    const CodePerformance perf = evaluate_code(code, ch_);
    d["n"] = n;
    d["M"] = M;
    if (p.rate > 0.0) d["rate"] = p.rate;
    d["trial"] = p.trial;
    d["seed"] = p.seed;
    d["eps_max"] = perf.max_error;
    d["eps_avg"] = perf.avg_error;
    BoundReport r;
    switch (cfg_.task) {
      case Task::Simulate: {
        const double chi_n = static_cast<double>(n) * capacity().chi;
        r = make_report("rate_vs_capacity", std::log(static_cast<double>(M)), chi_n);
        break;
      }
      case Task::Theorem1: r = theorem1_check(code, ch_, capacity()); break;
      case Task::Theorem2: r = second_order_converse_check(code, ch_); break;
      case Task::Lemma5: r = lemma5_check(code, ch_, capacity()); break;
      default: break;
    }
    d["report"] = io::to_json(r);
    res.row = row_of(n, M, perf.max_error, perf.avg_error, r);
    if (cfg_.task != Task::Simulate) {
      res.checks = 1;
      res.failures = r.holds ? 0 : 1;
    }
    return res;
  }

  PointResult proof_chain_point(const Point& p) {
    PointResult res;
    Rng rng(p.seed);
    Ensemble e;
    if (cfg_.ensemble) {
      e = *cfg_.ensemble;
    } else {
      e.probs = {0.5, 0.5};
      for (int k = 0; k < 2; ++k) e.states.push_back(DensityMatrix::pure(random_pure_state(ch_.dim_in(), rng)));
    }
    const auto& [alpha, t] = cfg_.chain_pairs[std::uniform_int_distribution<std::size_t>(0, cfg_.chain_pairs.size() - 1)(rng)];
    const std::size_t M = p.M != 0 ? p.M : messages_for_rate(capacity().chi, p.rate, p.n);
    const auto code = random_pgm_code(ch_, e, p.n, M, rng());
    const CodePerformance perf = evaluate_code(code, ch_);
    ProofChainConfig pc;
    pc.delta = cfg_.chain_delta;
    const auto reports = proof_chain_verify(code, ch_, alpha, t, pc);
    const double eps_reg = reports.front().components.at("eps");
    const TGridScan grid = scan_t_grid(eps_reg, p.n, ch_.dim_out(), std::log(static_cast<double>(M)));

    Json& d = res.detail;
    d["n"] = p.n;
    d["M"] = M;
    d["trial"] = p.trial;
    d["seed"] = p.seed;
    d["alpha"] = alpha;
    d["t"] = t;
    d["eps_max"] = perf.max_error;
    d["eps_avg"] = perf.avg_error;
    d["reports"] = io::to_json(reports);
    d["t_grid"] = Json{{"t_star", grid.t_star}, {"t_best", grid.t_best}, {"t_best_exact", grid.t_best_exact},
                       {"step", grid.step}, {"peak_near_t_star", grid.peak_near_t_star}};
    const BoundReport* worst = &reports.front();
    for (const auto& r : reports) {
      ++res.checks;
      if (!r.holds) ++res.failures;
      if (r.slack < worst->slack) worst = &r;
    }
    ++res.checks;
    if (!grid.peak_near_t_star) ++res.failures;
    res.row = row_of(p.n, M, perf.max_error, perf.avg_error, *worst);
    return res;
  }

  void sweep_task() {
    const auto pts = points();
    // capacity is shared state; settle it before any worker starts
    const bool random_codes = cfg_.code_source == CodeSource::RandomPgm && cfg_.task != Task::ProofChain;
    const bool needs_cap = cfg_.task == Task::Theorem1 || cfg_.task == Task::Lemma5 || cfg_.task == Task::Simulate ||
                           (random_codes && (!cfg_.ensemble || cfg_.sweep.m_values.empty())) ||
                           (cfg_.task == Task::ProofChain && cfg_.sweep.m_values.empty());
    if (needs_cap) out_.report["capacity"] = io::to_json(capacity());

    std::vector<PointResult> results(pts.size());
    std::vector<std::exception_ptr> errors(pts.size());
    for_each_index(pts.size(), cfg_.jobs, [&](std::size_t i) {
      try {
        results[i] = evaluate(pts[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    Json points_json = Json::array();
    for (auto& r : results) {
      out_.checks += r.checks;
      out_.failures += r.failures;
      out_.rows.push_back(r.row);
      points_json.push_back(std::move(r.detail));
    }
    out_.report["points"] = std::move(points_json);
  }

  const ExperimentConfig& cfg_;
  QuantumChannel ch_;
  std::optional<CapacityResult> cap_;
  ExperimentOutcome out_;
};

}  // namespace

std::string_view to_string(Task t) noexcept {
  switch (t) {
    case Task::Capacity: return "capacity";
    case Task::Certify: return "certify";
    case Task::Uniqueness: return "uniqueness";
    case Task::Simulate: return "simulate";
    case Task::Theorem1: return "theorem1";
    case Task::Theorem2: return "theorem2";
    case Task::Lemma5: return "lemma5";
    case Task::ProofChain: return "proof-chain";
  }
  return "?";
}

Task task_from_string(std::string_view name) {
  for (auto t : {Task::Capacity, Task::Certify, Task::Uniqueness, Task::Simulate, Task::Theorem1, Task::Theorem2,
                 Task::Lemma5, Task::ProofChain}) {
    if (to_string(t) == name) return t;
  }
  config_error("unknown task '" + std::string(name) + "'");
}

ExperimentConfig parse_experiment_config(const io::Json& j, Task task, const std::string& base_dir) {
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig c;
  c.task = task;
  if (j.contains("task") && task_from_string(j.at("task").get<std::string>()) != task) {
    config_error("config task '" + j.at("task").get<std::string>() + "' differs from the requested task");
  }
  if (!j.contains("channel")) config_error("missing 'channel'");
  c.channel = j.at("channel").is_string() ? io::read_json_file(resolve(base_dir, j.at("channel").get<std::string>()))
                                          : j.at("channel");
  const QuantumChannel ch = io::channel_from_json(c.channel);
  if (j.contains("solver")) c.solver = io::solver_config_from_json(j.at("solver"));
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  if (j.contains("jobs")) c.jobs = std::max(1u, j.at("jobs").get<unsigned>());

  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    if (s.contains("n_values")) c.sweep.n_values = positive_list(s.at("n_values"), "n_values");
    if (s.contains("M_values")) c.sweep.m_values = positive_list(s.at("M_values"), "M_values");
    if (s.contains("rates")) {
      c.sweep.rates = s.at("rates").get<std::vector<double>>();
      for (double r : c.sweep.rates) {
        if (!(r > 0.0) || !std::isfinite(r)) config_error("rates must be positive");
      }
    }
    if (s.contains("trials")) {
      const auto t = s.at("trials").get<long long>();
      if (t <= 0) config_error("trials must be positive");
      c.sweep.trials = static_cast<std::size_t>(t);
    }
  }
  for (std::size_t n : c.sweep.n_values) {
    checked_product(std::vector<std::size_t>(n, ch.dim_in()), kDefaultDimensionCap);
    checked_product(std::vector<std::size_t>(n, ch.dim_out()), kDefaultDimensionCap);
  }

  if (j.contains("code")) {
    const Json& code = j.at("code");
    const std::string source = code.value("source", std::string("random-pgm"));
    if (source == "basis") {
      c.code_source = CodeSource::Basis;
    } else if (source == "random-pgm") {
      c.code_source = CodeSource::RandomPgm;
    } else if (source == "file") {
      c.code_source = CodeSource::File;
      if (code.contains("path")) {
        c.code = io::read_json_file(resolve(base_dir, code.at("path").get<std::string>()));
      } else if (code.contains("codewords")) {
        c.code = code;
      } else {
        config_error("file codes need 'path' or inline 'codewords'");
      }
      io::code_from_json(*c.code);
    } else {
      config_error("unknown code source '" + source + "'");
    }
    if (code.contains("ensemble") && !code.at("ensemble").is_string()) c.ensemble = ensemble_from_json(code.at("ensemble"));
  }
  if (j.contains("proof_chain")) {
    const Json& pc = j.at("proof_chain");
    if (pc.contains("pairs")) {
      c.chain_pairs.clear();
      for (const auto& pr : pc.at("pairs")) {
        if (!pr.is_array() || pr.size() != 2) config_error("proof_chain pairs are [alpha, t]");
        c.chain_pairs.emplace_back(pr[0].get<double>(), pr[1].get<double>());
      }
      if (c.chain_pairs.empty()) config_error("proof_chain pairs must not be empty");
    }
    if (pc.contains("delta")) c.chain_delta = pc.at("delta").get<double>();
  }
  if (j.contains("uniqueness")) c.restarts = j.at("uniqueness").value("restarts", c.restarts);
  if (j.contains("certify")) c.probes = j.at("certify").value("probes", c.probes);

  const bool sweep_task = task != Task::Capacity && task != Task::Certify && task != Task::Uniqueness;
  if (sweep_task && c.code_source == CodeSource::RandomPgm && c.sweep.m_values.empty() && c.sweep.rates.empty()) {
    config_error("random codes need sweep.M_values or sweep.rates");
  }
  if (task == Task::ProofChain && c.sweep.m_values.empty() && c.sweep.rates.empty()) {
    config_error("proof-chain needs sweep.M_values or sweep.rates");
  }
  return c;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) { return Runner(cfg).run(); }

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(17) << "n,M,eps_max,eps_avg,lhs,rhs,slack,lhs_per_n\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.M << ',' << r.eps_max << ',' << r.eps_avg << ',' << r.lhs << ',' << r.rhs << ',' << r.slack
        << ',' << (r.n > 0 ? r.lhs / static_cast<double>(r.n) : r.lhs) << '\n';
  }
  return out.str();
}

void write_outcome(const ExperimentOutcome& out, const std::string& prefix) {
  const std::filesystem::path parent = std::filesystem::path(prefix).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  io::write_text_file(prefix + ".report.json", out.report.dump(2) + "\n");
  io::write_text_file(prefix + ".summary.csv", summary_csv(out.rows));
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError: return kExitConfig;
    case ErrorCode::DimensionOverflow: return kExitDimensionOverflow;
    case ErrorCode::NotConverged: return kExitNotConverged;
    default: return kExitOtherError;
  }
}

}  // namespace qcap
