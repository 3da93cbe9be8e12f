#pragma once

// Holevo capacity chi(N): Blahut-Arimoto weight updates alternated with
// pure-state candidate refinement, plus the max-divergence optimality
// certificate and a uniqueness probe for the optimal output state.

#include <cstdint>
#include <vector>

#include "qcap/entropy.hpp"
#include "qcap/random.hpp"

namespace qcap {

struct SolverConfig {
  double tol = 1e-7;
  int max_iters = 5000;
  double prune = 1e-6;
  int probes = 10000;
  std::uint64_t seed = 0;
  int refinements = 32;       // local ascents started from the best probes
  std::size_t dim_cap = 8;    // largest dim_in accepted by the general solver
  bool random_init = false;   // start from random pure states only (no basis states)
};

struct CapacityResult {
  double chi = 0.0;
  Ensemble ensemble;
  DensityMatrix omega_bar = DensityMatrix::maximally_mixed(1);
  double certificate_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // chi after every accepted update
};

struct Certificate {
  double gap = 0.0;            // max_rho D(N(rho) || omega) - chi over the probes
  double max_divergence = 0.0;
  DenseVector maximizer;
};

CapacityResult holevo_capacity(const QuantumChannel& n, const SolverConfig& cfg = {});

DensityMatrix optimal_output_state(const CapacityResult& r);

/// Probes `n_probes` Haar-random pure inputs, then runs local ascent from the
/// `refinements` best of them.
Certificate lemma2_certificate(const QuantumChannel& n, double chi, const DensityMatrix& omega, int n_probes,
                               std::uint64_t seed, int refinements = 32);

struct UniquenessReport {
  double max_distance = 0.0;
  std::vector<CapacityResult> runs;
};

/// Independent randomly initialised solves; max pairwise trace distance of the
/// optimal output states. Throws NotConverged if any restart fails.
UniquenessReport uniqueness_probe(const QuantumChannel& n, int n_restarts, std::uint64_t seed,
                                  const SolverConfig& cfg = {});

/// chi(N^(x)k) / k
double regularized_capacity_estimate(const QuantumChannel& n, int k, const SolverConfig& cfg = {});

/// D(N(psi psi^dagger) || omega) and its local maximisation over pure inputs.
double output_divergence(const QuantumChannel& n, const DivergenceReference& omega, const DenseVector& psi);
DenseVector ascend_output_divergence(const QuantumChannel& n, const DivergenceReference& omega, DenseVector psi,
                                     int max_steps = 200);

}  // namespace qcap
