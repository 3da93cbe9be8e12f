#pragma once

// Converse bounds on concrete codes: the induced-output-state bound for good
// codes, the second-order converse for block codes, the output-divergence
// bound that follows from it, and a step-by-step numerical check of the
// hypercontractivity argument behind the second-order converse.

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcap/capacity.hpp"
#include "qcap/codes.hpp"

namespace qcap {

inline constexpr double kBoundTol = 1e-8;

struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool holds = true;   // slack >= -components["tol"]
  std::map<std::string, double> components;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const;
};

/// Builds a report with slack = rhs - lhs and holds = slack >= -tol.
BoundReport make_report(std::string name, double lhs, double rhs, double tol = kBoundTol);

/// T -> e^{-t} T + (1 - e^{-t}) c I with c = Tr(sigma T) (phi) or Tr(T) (psi).
class SemigroupMap {
 public:
  static SemigroupMap phi(DensityMatrix sigma, double t);
  static SemigroupMap psi(std::size_t dim, double t);

  bool is_phi() const noexcept { return sigma_.has_value(); }
  double t() const noexcept { return t_; }
  std::size_t dim() const noexcept { return dim_; }
  /// Row-major d^2 x d^2 matrix of the map.
  DenseMatrix superoperator() const;

 private:
  SemigroupMap(std::optional<DensityMatrix> sigma, std::size_t dim, double t);

  std::optional<DensityMatrix> sigma_;
  std::size_t dim_;
  double t_;
};

DenseMatrix semigroup_apply(const SemigroupMap& m, const DenseMatrix& x);
ComplexMatrix semigroup_apply(const SemigroupMap& m, const ComplexMatrix& x);
/// Applies maps[i] on tensor factor i of x.
DenseMatrix semigroup_product_apply(std::span<const SemigroupMap> maps, const DenseMatrix& x);

/// (e^{-t} + d (1 - e^{-t}))^n, the scalar with Psi_t^(x)n (I) = scalar * I.
double psi_identity_scalar(double t, std::size_t d, std::size_t n);

/// ln(1/(1-eps)) with the eps -> 1 limit mapped to +inf.
double log_inverse_success(double eps);

/// sqrt(-ln(1-eps) / (n (d_out - 1)))
double optimal_t(double eps, std::size_t n, std::size_t d_out);

/// I + 2 sqrt(n (d_out - 1) ln(1/(1-eps))) + ln(1/(1-eps)); +inf once eps >= 1 - 1e-12.
double second_order_rhs(double mutual_information, double eps, std::size_t n, std::size_t d_out);

/// chi_n - ln M + 2 sqrt(...) - ln(1 - eps) (derived), or with both correction
/// terms negated (printed).
double lemma5_rhs(double chi_n, double log_m, double eps, std::size_t n, std::size_t d_out, bool printed = false);

/// The capacity-side quantities a bound needs at blocklength n: chi(N^n) and
/// the optimal output state on the n-fold output space. A single-letter
/// result is tensored up (additive channels); a result already computed for
/// N^(x)n is used as is. Throws NotConverged for an uncertified result.
struct BlockCapacity {
  double chi_n = 0.0;
  DenseMatrix omega_n;
  bool tensored = false;
};
BlockCapacity block_capacity(const CapacityResult& cap, const QuantumChannel& n, std::size_t blocklength);

/// D(omega_n || omega_bar_n) <= chi(N^n) + ln 2 - (1 - eps_max) ln M.
BoundReport theorem1_check(const ClassicalQuantumCode& code, const QuantumChannel& n, const CapacityResult& cap);

/// ln M <= I(M;B^n) + 2 sqrt(n (d_B - 1) ln(1/(1-eps))) + ln(1/(1-eps)).
/// Throws NotBlockCode for anything but a deterministic block code.
BoundReport second_order_converse_check(const ClassicalQuantumCode& code, const QuantumChannel& n);

/// D(N^n(rho~) || omega_bar_n) against the derived right-hand side; the printed
/// sign variant is reported in components (rhs_printed, slack_printed) and
/// flagged, never asserted.
BoundReport lemma5_check(const ClassicalQuantumCode& code, const QuantumChannel& n, const CapacityResult& cap);

struct ProofChainConfig {
  double delta = 1e-9;        // regularisation of slot outputs and decoder elements
  int optimiser_iters = 20;   // measured-Renyi refinement budget, seeded at the substitution
  double tol = kBoundTol;
  double order_probe = 1e-3;  // alpha used for the alpha -> 0 comparison
  double order_probe_tol = 1e-4;  // flags order_probe_far when D - D_{1-order_probe} exceeds it
};

/// Eight reports, one per inequality of the argument, each aggregated over
/// messages by its smallest slack. Throws ParameterOutOfRange unless
/// 0 < alpha < 1/2, t > 0 and q = 1 + (alpha/(alpha-1) - 1) e^{-t} > 0;
/// SingularElement if a regularised decoder element is not positive definite.
std::vector<BoundReport> proof_chain_verify(const ClassicalQuantumCode& code, const QuantumChannel& n, double alpha,
                                            double t, const ProofChainConfig& cfg = {});

/// 1 + (alpha/(alpha-1) - 1) e^{-t}
double hypercontractive_exponent(double alpha, double t);

/// Grid scan of ln M + (1 + 1/t) ln(1-eps) - n t (d-1) over t = lo, lo+step, ..., hi.
struct TGridScan {
  double t_star = 0.0;
  double t_best = 0.0;         // grid argmax of the bound above
  double t_best_exact = 0.0;   // grid argmax of the form with 1/(1-e^{-t})
  double step = 0.0;
  bool peak_near_t_star = false;  // |t_best - clamp(t_star)| <= step
};
TGridScan scan_t_grid(double eps, std::size_t n, std::size_t d_out, double log_m, double lo = 0.05, double hi = 2.0,
                      double step = 0.05);

struct SweepConfig {
  std::size_t max_blocklength = 3;
  std::size_t max_messages = 4;
  bool pgm = true;
  bool projective = true;
  double cap = kDefaultEnumerationCap;
  double tol = kBoundTol;
};

struct SweepResult {
  std::size_t codes = 0;      // distinct codebooks visited
  std::size_t instances = 0;  // (codebook, decoder) pairs checked
  std::size_t theorem2_failures = 0;
  std::size_t lemma5_failures = 0;
  std::size_t printed_failures = 0;  // printed sign variant of the output-divergence bound
  std::size_t epsilon_one = 0;
  double min_theorem2_slack = std::numeric_limits<double>::infinity();
  double min_lemma5_slack = std::numeric_limits<double>::infinity();
  double min_printed_slack = std::numeric_limits<double>::infinity();  // over printed failures only
  std::string first_failure;
  std::string worst_printed_failure;
};

/// Every block code with slots from `symbols`, 1 <= n <= max_blocklength and
/// 1 <= M <= max_messages, decoded by its PGM and by every basis-vector
/// projective decoder, checked against the second-order converse and the
/// output-divergence bound. Projective decoders only enter through their
/// diagonal overlaps, so those are walked depth-first without building POVMs.
SweepResult exhaustive_converse_sweep(std::span<const DensityMatrix> symbols, const QuantumChannel& n,
                                      const CapacityResult& cap, const SweepConfig& cfg = {});

}  // namespace qcap
