#include "qcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace qcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxWeightSteps = 20000;
constexpr int kLocalStarts = 4;

struct Atom {
  DenseVector psi;
  DenseMatrix out;
  double out_entropy = 0.0;
};

Atom make_atom(const QuantumChannel& n, DenseVector psi) {
  psi /= psi.norm();
  Atom a;
  a.out = apply_channel(n, DenseMatrix(psi * psi.adjoint()));
  a.out = 0.5 * (a.out + a.out.adjoint());
  a.out_entropy = von_neumann_entropy(a.out);
  a.psi = std::move(psi);
  return a;
}

struct Evaluation {
  double chi = 0.0;
  double max_div = -kInf;
  std::vector<double> div;
  DenseMatrix omega;
};

Evaluation evaluate(const std::vector<Atom>& atoms, const std::vector<double>& p) {
  Evaluation e;
  e.omega = DenseMatrix::Zero(atoms.front().out.rows(), atoms.front().out.cols());
  for (std::size_t x = 0; x < atoms.size(); ++x) e.omega += p[x] * atoms[x].out;
  e.omega = 0.5 * (e.omega + e.omega.adjoint());
  const DivergenceReference ref(e.omega);
  e.div.resize(atoms.size());
  for (std::size_t x = 0; x < atoms.size(); ++x) {
    const auto d = ref.relative_entropy(atoms[x].out, atoms[x].out_entropy);
    e.div[x] = d.is_finite() ? d.value : kInf;
    if (p[x] > 0.0) e.chi += p[x] * e.div[x];
    e.max_div = std::max(e.max_div, e.div[x]);
  }
  return e;
}

// Weight updates p_x <- p_x exp(eta (D_x - max D)). eta = 1 is the classical
// Blahut-Arimoto map and is always taken; larger steps are kept only when they
// shrink the atom-level gap max D - chi without lowering chi. chi is flat near
// the optimum, so the gap (first order in the error of omega) is the progress
// measure.
Evaluation optimise_weights(const std::vector<Atom>& atoms, std::vector<double>& p, double tol) {
  Evaluation cur = evaluate(atoms, p);
  double eta = 1.0;
  for (int step = 0; step < kMaxWeightSteps; ++step) {
    const double gap = cur.max_div - cur.chi;
    if (gap <= 0.1 * tol) break;
    const double try_eta = std::min(2.0 * eta, 1e5);
    auto update = [&](double e) {
      std::vector<double> q(p.size());
      double z = 0.0;
      for (std::size_t x = 0; x < p.size(); ++x) {
        q[x] = p[x] * std::exp(e * (std::min(cur.div[x], cur.max_div) - cur.max_div));
        z += q[x];
      }
      for (double& v : q) v /= z;
      return q;
    };
    std::vector<double> q = update(try_eta);
    Evaluation next = evaluate(atoms, q);
    if (next.chi >= cur.chi - 1e-15 && next.max_div - next.chi < gap) {
      eta = try_eta;
    } else {
      eta = std::max(1.0, 0.25 * eta);
      q = update(eta);
      next = evaluate(atoms, q);
      if (eta > 1.0 && !(next.chi >= cur.chi - 1e-15 && next.max_div - next.chi < gap)) {
        eta = 1.0;
        q = update(1.0);
        next = evaluate(atoms, q);
      }
    }
    if (q == p) break;
    p = std::move(q);
    cur = std::move(next);
  }
  return cur;
}

void drop_small(std::vector<Atom>& atoms, std::vector<double>& p, Evaluation& cur, double prune, double tol) {
  std::vector<Atom> kept_atoms;
  std::vector<double> kept_p;
  // atoms whose divergence sits clearly below the top carry no weight at the
  // optimum; left in with a small weight they bias omega
  for (std::size_t x = 0; x < atoms.size(); ++x) {
    if (p[x] >= prune && cur.div[x] >= cur.max_div - tol) {
      kept_atoms.push_back(atoms[x]);
      kept_p.push_back(p[x]);
    }
  }
  if (kept_atoms.size() == atoms.size() || kept_atoms.empty()) return;
  const double total = std::accumulate(kept_p.begin(), kept_p.end(), 0.0);
  for (double& v : kept_p) v /= total;
  Evaluation next = optimise_weights(kept_atoms, kept_p, tol);
  if (next.chi >= cur.chi - 1e-12) {
    atoms = std::move(kept_atoms);
    p = std::move(kept_p);
    cur = std::move(next);
  }
}

DenseVector top_eigenvector(const DenseMatrix& h) {
  const auto es = jacobi_eigensystem(h);
  return es.vectors.col(es.values.size() - 1);
}

}  // namespace

double output_divergence(const QuantumChannel& n, const DivergenceReference& omega, const DenseVector& psi) {
  DenseMatrix out = apply_channel(n, DenseMatrix(psi * psi.adjoint()));
  out = 0.5 * (out + out.adjoint());
  const auto d = omega.relative_entropy(out);
  return d.is_finite() ? d.value : kInf;
}

DenseVector ascend_output_divergence(const QuantumChannel& n, const DivergenceReference& omega, DenseVector psi,
                                     int max_steps) {
  psi /= psi.norm();
  double f = output_divergence(n, omega, psi);
  for (int step = 0; step < max_steps && std::isfinite(f); ++step) {
    DenseMatrix out = apply_channel(n, DenseMatrix(psi * psi.adjoint()));
    out = 0.5 * (out + out.adjoint());
    const DenseMatrix log_out = apply_function(jacobi_eigensystem(out), ScalarFunction::log());
    DenseMatrix g = apply_adjoint(n, log_out - omega.log_sigma());
    g = 0.5 * (g + g.adjoint());
    const DenseVector cand = top_eigenvector(g);
    const double fc = output_divergence(n, omega, cand);
    if (!(fc > f + 1e-15)) break;
    psi = cand;
    f = fc;
  }
  return psi;
}

Certificate lemma2_certificate(const QuantumChannel& n, double chi, const DensityMatrix& omega, int n_probes,
                               std::uint64_t seed, int refinements) {
  if (omega.dim() != n.dim_out()) throw Error(ErrorCode::DimensionMismatch, "omega does not match channel output");
  const DivergenceReference ref(omega.dense());
  Rng rng(seed);
  std::vector<std::pair<double, DenseVector>> scored;
  scored.reserve(static_cast<std::size_t>(std::max(n_probes, 0)));
  for (int i = 0; i < n_probes; ++i) {
    DenseVector psi = random_pure_state(n.dim_in(), rng);
    scored.emplace_back(output_divergence(n, ref, psi), std::move(psi));
  }
  const auto keep = static_cast<std::size_t>(std::clamp(refinements, 0, n_probes));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  Certificate c;
  c.max_divergence = -kInf;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    double f = scored[i].first;
    DenseVector psi = scored[i].second;
    if (i < keep) {
      psi = ascend_output_divergence(n, ref, psi);
      f = output_divergence(n, ref, psi);
    }
    if (f > c.max_divergence) {
      c.max_divergence = f;
      c.maximizer = psi;
    }
  }
  c.gap = c.max_divergence - chi;
  return c;
}

CapacityResult holevo_capacity(const QuantumChannel& n, const SolverConfig& cfg) {
  const std::size_t din = n.dim_in();
  if (din > cfg.dim_cap) {
    throw Error(ErrorCode::DimensionOverflow,
                "dim_in " + std::to_string(din) + " exceeds solver cap " + std::to_string(cfg.dim_cap));
  }
  // optimal ensembles need at most din^2 atoms; the working set may hold twice that while mixing
  const std::size_t atom_cap = 2 * std::max<std::size_t>(din * din, 1);
  Rng rng(derive_seed(cfg.seed, 0));

  std::vector<Atom> atoms;
  if (!cfg.random_init) {
    for (std::size_t i = 0; i < din; ++i) {
      DenseVector e = DenseVector::Zero(static_cast<Eigen::Index>(din));
      e(static_cast<Eigen::Index>(i)) = 1.0;
      atoms.push_back(make_atom(n, e));
    }
  }
  while (atoms.size() < din + 1) {
    atoms.push_back(make_atom(n, random_pure_state(din, rng)));
  }
  std::vector<double> p(atoms.size(), 1.0 / static_cast<double>(atoms.size()));

  CapacityResult res;
  Evaluation cur = optimise_weights(atoms, p, cfg.tol);
  res.history.push_back(cur.chi);
  drop_small(atoms, p, cur, cfg.prune, cfg.tol);
  res.history.push_back(cur.chi);

  Certificate cert;
  bool have_cert = false;
  for (int it = 0; it < cfg.max_iters; ++it) {
    res.iterations = it + 1;
    const DivergenceReference ref(cur.omega);

    // candidate search: ascent from each atom and a few fresh random inputs
    DenseVector best_psi;
    double best_f = -kInf;
    auto consider = [&](DenseVector start) {
      DenseVector psi = ascend_output_divergence(n, ref, std::move(start));
      const double f = output_divergence(n, ref, psi);
      if (f > best_f) {
        best_f = f;
        best_psi = std::move(psi);
      }
    };
    for (const auto& a : atoms) consider(a.psi);
    for (int s = 0; s < kLocalStarts; ++s) consider(random_pure_state(din, rng));

    if (best_f - cur.chi <= cfg.tol) {
      cert = lemma2_certificate(n, cur.chi, DensityMatrix(cur.omega), cfg.probes,
                                derive_seed(cfg.seed, static_cast<std::uint64_t>(it) + 1), cfg.refinements);
      have_cert = true;
      if (cert.gap <= cfg.tol) {
        res.converged = true;
        break;
      }
      best_psi = cert.maximizer;
      best_f = cert.max_divergence;
    }

    // insert the candidate: mix it in with a halving line search on its weight
    const Atom cand = make_atom(n, best_psi);
    bool accepted = false;
    if (atoms.size() < atom_cap) {
      std::vector<Atom> trial_atoms = atoms;
      trial_atoms.push_back(cand);
      std::vector<double> best_q;
      double best_chi = cur.chi;
      for (double lambda = 0.5; lambda > 1e-9; lambda *= 0.5) {
        std::vector<double> q(p.size() + 1);
        for (std::size_t x = 0; x < p.size(); ++x) q[x] = (1.0 - lambda) * p[x];
        q.back() = lambda;
        const double c = evaluate(trial_atoms, q).chi;
        if (c > best_chi) {
          best_chi = c;
          best_q = std::move(q);
        } else if (!best_q.empty()) {
          break;
        }
      }
      if (!best_q.empty()) {
        atoms = std::move(trial_atoms);
        p = std::move(best_q);
        cur = evaluate(atoms, p);
        res.history.push_back(cur.chi);
        accepted = true;
      }
    } else {
      // at the atom cap: replace the lightest atom, keep only on improvement
      const auto lightest = static_cast<std::size_t>(std::min_element(p.begin(), p.end()) - p.begin());
      std::vector<Atom> trial_atoms = atoms;
      std::vector<double> q = p;
      trial_atoms[lightest] = cand;
      Evaluation next = optimise_weights(trial_atoms, q, cfg.tol);
      if (next.chi > cur.chi) {
        atoms = std::move(trial_atoms);
        p = std::move(q);
        cur = std::move(next);
        res.history.push_back(cur.chi);
        accepted = true;
      }
    }
    if (!accepted) break;

    cur = optimise_weights(atoms, p, cfg.tol);
    res.history.push_back(cur.chi);
    drop_small(atoms, p, cur, cfg.prune, cfg.tol);
    res.history.push_back(cur.chi);
  }

  if (!have_cert || !res.converged) {
    cert = lemma2_certificate(n, cur.chi, DensityMatrix(cur.omega), cfg.probes,
                              derive_seed(cfg.seed, 0xC0FFEEULL), cfg.refinements);
    res.converged = cert.gap <= cfg.tol;
  }

  res.ensemble.probs = p;
  res.ensemble.states.clear();
  for (const auto& a : atoms) res.ensemble.states.push_back(DensityMatrix::pure(a.psi));
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : res.ensemble.probs) v /= total;
  std::vector<DensityMatrix> outputs;
  for (const auto& s : res.ensemble.states) outputs.push_back(apply_channel(n, s));
  res.omega_bar = ensemble_average(res.ensemble.probs, outputs);
  res.chi = cur.chi;
  res.certificate_gap = cert.gap;
  // cross-check the two chi expressions on the returned ensemble
  const auto forms = holevo_forms(res.ensemble.probs, outputs);
  if (std::abs(forms.entropy_form - forms.divergence_form) > 1e-6 || std::abs(forms.divergence_form - res.chi) > 1e-6) {
    throw Error(ErrorCode::InternalInconsistency, "chi expressions disagree on the solver output");
  }
  return res;
}

DensityMatrix optimal_output_state(const CapacityResult& r) { return r.omega_bar; }

UniquenessReport uniqueness_probe(const QuantumChannel& n, int n_restarts, std::uint64_t seed,
                                  const SolverConfig& cfg) {
  UniquenessReport rep;
  for (int r = 0; r < n_restarts; ++r) {
    SolverConfig c = cfg;
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    c.random_init = true;
    CapacityResult res = holevo_capacity(n, c);
    if (!res.converged) {
      throw Error(ErrorCode::NotConverged, "restart " + std::to_string(r) + " did not converge (gap " +
                                               std::to_string(res.certificate_gap) + ")");
    }
    rep.runs.push_back(std::move(res));
  }
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.runs.size(); ++j) {
      rep.max_distance = std::max(rep.max_distance,
                                  trace_distance(rep.runs[i].omega_bar.matrix(), rep.runs[j].omega_bar.matrix()));
    }
  }
  return rep;
}

double regularized_capacity_estimate(const QuantumChannel& n, int k, const SolverConfig& cfg) {
  if (k < 1) throw Error(ErrorCode::BadParameter, "tensor power must be positive");
  std::vector<std::size_t> dims(static_cast<std::size_t>(k), n.dim_in());
  checked_product(dims, cfg.dim_cap);
  const auto power = channel_tensor_power(n, static_cast<std::size_t>(k));
  return holevo_capacity(power, cfg).chi / static_cast<double>(k);
}

}  // namespace qcap
