// One PASS/FAIL line per acceptance criterion. Optional arguments select
// criteria by number, e.g. `qcap_acceptance 2 3`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcap/bounds.hpp"
#include "qcap/experiment.hpp"
#include "qcap/random.hpp"

using namespace qcap;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double min_eig(const DenseMatrix& h) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (h + h.adjoint()));
  return es.eigenvalues()(0);
}

DensityMatrix density(const DenseMatrix& m) { return DensityMatrix{ComplexMatrix(m)}; }

std::vector<DensityMatrix> overlap_half_symbols() {
  DenseVector plus(2);
  plus << std::sqrt(0.5), std::sqrt(0.5);
  return {DensityMatrix::basis_state(2, 0), DensityMatrix::pure(plus)};
}

// Binary entropy in nats, written out here so the oracle shares nothing with
// the library's spectral routines.
double binary_entropy(double x) {
  double h = 0.0;
  if (x > 0.0) h -= x * std::log(x);
  if (x < 1.0) h -= (1.0 - x) * std::log1p(-x);
  return h;
}

// Depolarizing qubit: by covariance an optimal ensemble is an orthogonal pure
// pair with weights (q, 1-q). Each output has eigenvalues 1-p/2, p/2, the
// average has q(1-p/2) + (1-q)p/2. Grid over q, then golden-section refine.
double depolarizing_oracle(double p) {
  const double lo_eig = p / 2.0;
  auto chi = [&](double q) { return binary_entropy(q * (1.0 - lo_eig) + (1.0 - q) * lo_eig) - binary_entropy(lo_eig); };
  double best_q = 0.0, best = chi(0.0);
  const int grid = 20000;
  for (int k = 1; k <= grid; ++k) {
    const double q = static_cast<double>(k) / grid;
    if (chi(q) > best) best = chi(q), best_q = q;
  }
  double a = std::max(0.0, best_q - 1.0 / grid), b = std::min(1.0, best_q + 1.0 / grid);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (chi(c) < chi(d)) a = c; else b = d;
  }
  return std::max(best, chi(0.5 * (a + b)));
}

const std::vector<double>& depolarizing_ps() {
  static const std::vector<double> ps{0.1, 0.3, 0.5, 0.7, 0.9};
  return ps;
}

const std::vector<CapacityResult>& depolarizing_caps() {
  static const std::vector<CapacityResult> caps = [] {
    std::vector<CapacityResult> out;
    for (double p : depolarizing_ps()) out.push_back(holevo_capacity(depolarizing(2, p)));
    return out;
  }();
  return caps;
}

Outcome lemma1_suite() {
  Outcome o;
  Rng rng(101);
  std::uniform_int_distribution<std::size_t> ud(2, 4);
  std::uniform_real_distribution<double> ulog(-7.0, -2.0);
  double min_d = 1e300, max_self = 0.0, max_td_small = 0.0;
  int small = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t d = ud(rng);
    const DenseMatrix rho = random_density(d, rng, k % 5 == 4 ? d - 1 : 0);
    DenseMatrix sigma;
    if (k % 2 == 0) {
      sigma = random_density(d, rng);
    } else {
      const double eta = std::pow(10.0, ulog(rng));
      sigma = (1.0 - eta) * rho + eta * random_density(d, rng);
    }
    const auto r = density(rho), s = density(sigma);
    const auto div = relative_entropy(r, s);
    const double dv = div.is_finite() ? div.value : 1e300;
    min_d = std::min(min_d, dv);
    const auto self = relative_entropy(r, r);
    max_self = std::max(max_self, self.is_finite() ? std::abs(self.value) : 1e300);
    if (dv <= 1e-6) {
      ++small;
      max_td_small = std::max(max_td_small, trace_distance(r.matrix(), s.matrix()));
    }
  }
  o.pass = min_d >= -1e-9 && max_self <= 1e-9 && max_td_small <= 1e-2 && small > 0;
  o.detail = fmt("min D=%.3e, max D(rho,rho)=%.3e, %d pairs with D<=1e-6, max trace distance among them %.3e", min_d,
                 max_self, small, max_td_small);
  return o;
}

Outcome capacity_oracle() {
  Outcome o;
  double worst = 0.0, worst_gap = -1e300;
  for (std::size_t i = 0; i < depolarizing_ps().size(); ++i) {
    const auto& cap = depolarizing_caps()[i];
    const double diff = std::abs(cap.chi - depolarizing_oracle(depolarizing_ps()[i]));
    worst = std::max(worst, diff);
    worst_gap = std::max(worst_gap, cap.certificate_gap);
    if (diff > 1e-6 || cap.certificate_gap > 1e-5 || !cap.converged) o.pass = false;
  }
  o.detail = fmt("5 channels, max |chi - oracle|=%.3e, max certificate gap=%.3e", worst, worst_gap);
  return o;
}

Outcome certificate() {
  Outcome o;
  double worst = -1e300;
  for (std::size_t i = 0; i < depolarizing_ps().size(); ++i) {
    const auto& cap = depolarizing_caps()[i];
    const auto c = lemma2_certificate(depolarizing(2, depolarizing_ps()[i]), cap.chi, optimal_output_state(cap), 10000,
                                      derive_seed(303, i));
    worst = std::max(worst, c.gap);
    if (c.gap > 1e-5) o.pass = false;
  }
  o.detail = fmt("10^4 probes per channel, max D(N(rho)||omega) - chi=%.3e", worst);
  return o;
}

Outcome uniqueness() {
  Outcome o;
  const auto symbols = overlap_half_symbols();
  const auto dep = uniqueness_probe(depolarizing(2, 0.3), 20, 404);
  const auto cq = uniqueness_probe(cq_channel(symbols), 20, 405);
  o.pass = dep.max_distance <= 1e-5 && cq.max_distance <= 1e-5;
  o.detail = fmt("20 restarts each, max pairwise trace distance: depolarizing %.3e, cq %.3e", dep.max_distance,
                 cq.max_distance);
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Outcome theorem1_suite() {
  Outcome o;
  std::string detail;

  // (a) noiseless basis codes
  io::Json basis = io::Json::parse(R"({"channel": {"family": "identity", "d": 2}, "code": {"source": "basis"}})");
  basis["sweep"]["n_values"] = {1, 2, 3, 4, 5, 6, 7, 8};
  const auto a = run_experiment(parse_experiment_config(basis, Task::Theorem1));
  double worst_lhs = 0.0, worst_slack_dev = 0.0;
  for (const auto& r : a.rows) {
    worst_lhs = std::max(worst_lhs, std::abs(r.lhs));
    worst_slack_dev = std::max(worst_slack_dev, std::abs(r.slack - std::numbers::ln2));
  }
  const bool pass_a = a.rows.size() == 8 && worst_lhs <= 1e-8 && worst_slack_dev <= 1e-8;
  detail += fmt("(a) %s max|lhs|=%.1e max|slack-ln2|=%.1e; ", pass_a ? "ok" : "FAIL", worst_lhs, worst_slack_dev);

  // (b) 200 random PGM codes
  const auto dep = depolarizing(2, 0.1);
  const auto cap = holevo_capacity(dep);
  const std::vector<double> rates{0.5, 0.7, 0.9};
  int b_fail = 0;
  double b_min = 1e300;
  for (std::size_t k = 0; k < 200; ++k) {
    const std::size_t n = 1 + (k / 3) % 6;
    const std::size_t M = messages_for_rate(cap.chi, rates[k % 3], n);
    const auto code = random_pgm_code(dep, cap.ensemble, n, M, derive_seed(505, k));
    const auto r = theorem1_check(code, dep, cap);
    b_min = std::min(b_min, r.slack);
    if (!r.holds) ++b_fail;
  }
  const bool pass_b = b_fail == 0;
  detail += fmt("(b) %s %d/200 violations, min slack %.3e; ", pass_b ? "ok" : "FAIL", b_fail, b_min);

  // (c) rate-0.5 series, median of lhs/n over 20 trials
  std::vector<double> med, se;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<double> per_n;
    const std::size_t M = messages_for_rate(cap.chi, 0.5, n);
    for (std::size_t trial = 0; trial < 20; ++trial) {
      const auto code = random_pgm_code(dep, cap.ensemble, n, M, derive_seed(506, n * 100 + trial));
      per_n.push_back(theorem1_check(code, dep, cap).lhs / static_cast<double>(n));
    }
    med.push_back(median(per_n));
    se.push_back(1.2533 * stddev(per_n) / std::sqrt(20.0));
  }
  bool pass_c = true;
  std::string series;
  for (std::size_t i = 0; i < med.size(); ++i) {
    series += fmt("%s%.4f", i ? "," : "", med[i]);
    if (i + 1 < med.size() && med[i + 1] > med[i] + 3.0 * std::hypot(se[i], se[i + 1])) pass_c = false;
  }
  detail += fmt("(c) %s medians n=1..6: %s", pass_c ? "ok" : "FAIL", series.c_str());

  o.pass = pass_a && pass_b && pass_c;
  o.detail = detail;
  return o;
}

const SweepResult& identity_sweep() {
  static const SweepResult res = [] {
    const auto symbols = overlap_half_symbols();
    const auto ch = identity_channel(2);
    return exhaustive_converse_sweep(symbols, ch, holevo_capacity(ch));
  }();
  return res;
}

Outcome theorem2_exhaustive() {
  Outcome o;
  const auto& s = identity_sweep();
  o.pass = s.theorem2_failures == 0 && s.instances > 0;
  o.detail = fmt("%zu codes, %zu (code, decoder) instances, %zu failures, min slack %.3e", s.codes, s.instances,
                 s.theorem2_failures, s.min_theorem2_slack);
  if (!s.first_failure.empty()) o.detail += "; first failure: " + s.first_failure;
  return o;
}

Outcome lemma5_exhaustive() {
  Outcome o;
  const auto& s = identity_sweep();
  o.pass = s.lemma5_failures == 0 && s.printed_failures > 0;
  o.detail = fmt("%zu failures of the derived form, min slack %.3e; printed sign variant fails on %zu instances, worst: %s",
                 s.lemma5_failures, s.min_lemma5_slack, s.printed_failures, s.worst_printed_failure.c_str());
  return o;
}

Outcome proof_chain() {
  Outcome o;
  const std::vector<std::pair<double, double>> pairs{{0.1, 0.5}, {0.1, 1.0}, {0.25, 0.5}, {0.25, 1.0}, {0.4, 1.0}};
  std::vector<std::size_t> step_fail(8, 0);
  std::vector<double> step_min(8, 1e300);
  std::vector<std::string> names(8);
  int grid_fail = 0;
  for (std::size_t k = 0; k < 500; ++k) {
    Rng rng(derive_seed(808, k));
    const double p = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    const auto ch = depolarizing(2, p);
    Ensemble e{{0.5, 0.5}, {DensityMatrix::pure(random_pure_state(2, rng)), DensityMatrix::pure(random_pure_state(2, rng))}};
    const std::size_t n = 1 + k % 3;
    const std::size_t M = 2 + (k / 3) % 3;
    const auto& [alpha, t] = pairs[(k / 9) % pairs.size()];
    const auto code = random_pgm_code(ch, e, n, M, rng());
    const auto reports = proof_chain_verify(code, ch, alpha, t);
    for (std::size_t s = 0; s < reports.size(); ++s) {
      names[s] = reports[s].name;
      step_min[s] = std::min(step_min[s], reports[s].slack);
      if (!reports[s].holds) ++step_fail[s];
    }
    const auto grid = scan_t_grid(reports.front().components.at("eps"), n, 2, std::log(static_cast<double>(M)));
    if (!grid.peak_near_t_star) ++grid_fail;
  }
  std::string detail = "500 instances;";
  for (std::size_t s = 0; s < 8; ++s) {
    if (step_fail[s] != 0) o.pass = false;
    detail += fmt(" %s %zu fail (min slack %.2e);", names[s].c_str(), step_fail[s], step_min[s]);
  }
  if (grid_fail != 0) o.pass = false;
  detail += fmt(" t-grid peak off t*: %d", grid_fail);
  o.detail = detail;
  return o;
}

Outcome divergence_order() {
  Outcome o;
  Rng rng(909);
  std::uniform_real_distribution<double> ua(0.05, 0.95);
  double worst_order = -1e300, worst_bracket = 0.0;
  int order_fail = 0, bracket_fail = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t d = 2 + k % 2;
    const auto rho = density(random_density(d, rng)), sigma = density(random_density(d, rng));
    const double alpha = ua(rng);
    const double measured = measured_renyi_divergence(alpha, rho, sigma).value;
    const double petz = petz_renyi_divergence(alpha, rho, sigma).value;
    worst_order = std::max(worst_order, measured - petz);
    if (measured > petz + 1e-8) ++order_fail;

    const double dv = relative_entropy(rho, sigma).value;
    const double below = petz_renyi_divergence(1.0 - 1e-4, rho, sigma).value;
    const double above = petz_renyi_divergence(1.0 + 1e-4, rho, sigma).value;
    worst_bracket = std::max({worst_bracket, std::abs(below - dv), std::abs(above - dv)});
    if (!(below <= dv + 1e-12 && dv <= above + 1e-12) || std::abs(below - dv) > 1e-3 || std::abs(above - dv) > 1e-3) {
      ++bracket_fail;
    }
  }
  o.pass = order_fail == 0 && bracket_fail == 0;
  o.detail = fmt("200 pairs: max(measured - petz)=%.3e (%d violations); bracket deviation max %.3e (%d violations)",
                 worst_order, order_fail, worst_bracket, bracket_fail);
  return o;
}

Outcome semigroup_suite() {
  Outcome o;
  Rng rng(1010);
  std::uniform_real_distribution<double> ut(0.01, 3.0), u01(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> ud(2, 4);
  double worst_loewner = 1e300;
  for (int k = 0; k < 200; ++k) {
    const std::size_t d = ud(rng);
    const DenseMatrix v = random_unitary(d, rng);
    DenseMatrix diag = DenseMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < diag.rows(); ++i) diag(i, i) = u01(rng);
    const DenseMatrix e = v * diag * v.adjoint();
    const auto sigma = density(random_density(d, rng));
    const double t = ut(rng);
    worst_loewner = std::min(
        worst_loewner, min_eig(semigroup_apply(SemigroupMap::psi(d, t), e) - semigroup_apply(SemigroupMap::phi(sigma, t), e)));
  }
  double worst_closed = 0.0;
  for (std::size_t d : {2u, 3u}) {
    for (std::size_t n = 1; n <= 3; ++n) {
      for (double t : {0.05, 0.5, 1.0, 2.0}) {
        const std::vector<SemigroupMap> maps(n, SemigroupMap::psi(d, t));
        const auto D = static_cast<Eigen::Index>(std::pow(d, n));
        const double c = std::pow(std::exp(-t) + static_cast<double>(d) * (1.0 - std::exp(-t)), static_cast<double>(n));
        const DenseMatrix out = semigroup_product_apply(maps, DenseMatrix::Identity(D, D));
        worst_closed = std::max(worst_closed, (out - c * DenseMatrix::Identity(D, D)).cwiseAbs().maxCoeff() / c);
      }
    }
  }
  int convex_fail = 0;
  for (std::size_t d = 2; d <= 6; ++d) {
    for (std::size_t n = 1; n <= 8; ++n) {
      for (int k = 1; k <= 100; ++k) {
        const double t = 0.03 * k;
        if (psi_identity_scalar(t, d, n) > std::exp((static_cast<double>(d) - 1.0) * t * static_cast<double>(n))) {
          ++convex_fail;
        }
      }
    }
  }
  o.pass = worst_loewner >= -1e-10 && worst_closed <= 1e-10 && convex_fail == 0;
  o.detail = fmt("min eig(psi - phi)=%.3e over 200; closed form rel. err %.3e; convexity grid violations %d",
                 worst_loewner, worst_closed, convex_fail);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "qcap_acceptance_repro";
  std::filesystem::create_directories(dir);
  const io::Json j = io::Json::parse(R"({
    "channel": {"family": "depolarizing", "d": 2, "p": 0.1},
    "seed": 2024,
    "sweep": {"n_values": [1, 2, 3], "rates": [0.5, 0.9], "trials": 3}
  })");
  const auto cfg = parse_experiment_config(j, Task::Theorem2);
  write_outcome(run_experiment(cfg), (dir / "first").string());
  write_outcome(run_experiment(cfg), (dir / "second").string());
  bool same = true;
  std::size_t bytes = 0;
  for (const char* ext : {".report.json", ".summary.csv"}) {
    const std::string a = slurp(dir / (std::string("first") + ext));
    const std::string b = slurp(dir / (std::string("second") + ext));
    same = same && !a.empty() && a == b;
    bytes += a.size();
  }
  std::filesystem::remove_all(dir);
  o.pass = same;
  o.detail = fmt("two runs of a seeded theorem2 sweep, %zu bytes compared, %s", bytes, same ? "identical" : "differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"relative entropy basics", lemma1_suite},
      {"capacity vs depolarizing oracle", capacity_oracle},
      {"max-divergence certificate", certificate},
      {"optimal output uniqueness", uniqueness},
      {"induced output bound", theorem1_suite},
      {"second-order converse, exhaustive", theorem2_exhaustive},
      {"output-divergence bound, exhaustive", lemma5_exhaustive},
      {"hypercontractivity proof chain", proof_chain},
      {"divergence ordering", divergence_order},
      {"semigroup suite", semigroup_suite},
      {"reproducibility", reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%2d] %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
