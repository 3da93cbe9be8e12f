#pragma once

// Entropic functionals in nats: von Neumann entropy, relative entropy, Holevo
// quantity, Petz and measured Renyi divergences, weighted L_p norms.

#include <span>
#include <vector>

#include "qcap/states.hpp"

namespace qcap {

/// rho is considered to leave supp(sigma) when Tr(P_ker(sigma) rho) exceeds this.
inline constexpr double kSupportLeakTol = 1e-10;

struct DivergenceValue {
  double value = 0.0;  // nats; +inf when support_violated
  bool support_violated = false;

  static DivergenceValue finite(double v) { return {v, false}; }
  static DivergenceValue infinite();
  bool is_finite() const noexcept { return !support_violated; }
};

/// -sum lambda ln lambda over the positive entries.
double entropy_of_spectrum(const RealVector& eigenvalues);
double von_neumann_entropy(const DensityMatrix& rho);
double von_neumann_entropy(const DenseMatrix& rho);

DivergenceValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);
DivergenceValue relative_entropy(const DenseMatrix& rho, const DenseMatrix& sigma);

/// Caches ln(sigma) on its support and the kernel projector so that many
/// D(rho || sigma) evaluations against one sigma cost one eigendecomposition each.
class DivergenceReference {
 public:
  explicit DivergenceReference(const DenseMatrix& sigma);

  DivergenceValue relative_entropy(const DenseMatrix& rho) const;
  /// Same, with S(rho) supplied by the caller (e.g. a sum of slot entropies).
  DivergenceValue relative_entropy(const DenseMatrix& rho, double rho_entropy) const;
  /// Tr(P_ker rho)
  double support_leak(const DenseMatrix& rho) const;

  const DenseMatrix& log_sigma() const noexcept { return log_sigma_; }
  bool full_rank() const noexcept { return kernel_rank_ == 0; }

 private:
  DenseMatrix log_sigma_;
  DenseMatrix kernel_projector_;
  Eigen::Index kernel_rank_ = 0;
};

struct HolevoForms {
  double entropy_form = 0.0;     // S(avg) - sum p S(rho_x)
  double divergence_form = 0.0;  // sum p D(rho_x || avg)
};

/// Both expressions for sum_x p_x D(rho_x || sum_y p_y rho_y).
HolevoForms holevo_forms(std::span<const double> probs, std::span<const DensityMatrix> outputs);

/// chi of the ensemble pushed through `n`. Returns the divergence form; throws
/// InternalInconsistency if the two forms differ by more than 1e-6.
double holevo_quantity(const Ensemble& e, const QuantumChannel& n);

/// I(M;B) of the cq state sum_m p_m |m><m| (x) rho_m.
double cq_mutual_information(std::span<const double> probs, std::span<const DensityMatrix> output_states);

/// (1/(alpha-1)) ln Tr(rho^alpha sigma^(1-alpha)), powers on supports.
DivergenceValue petz_renyi_divergence(double alpha, const DensityMatrix& rho, const DensityMatrix& sigma);
DivergenceValue petz_renyi_divergence(double alpha, const DenseMatrix& rho, const DenseMatrix& sigma);

struct MeasuredRenyiConfig {
  int max_iters = 2000;
  double tol = 1e-9;          // on objective change per iteration
  double fd_step = 1e-5;      // central-difference step on the Hermitian parameter
  double regularization = 1e-9;
  std::vector<DenseMatrix> seeds;  // positive-definite omega guesses
};

struct MeasuredRenyiResult {
  double value = 0.0;
  DenseMatrix omega;  // best omega found (trace-normalised)
  int iterations = 0;
  bool converged = false;
};

/// (1/(alpha-1)) ln(Tr^alpha(rho omega) Tr^(1-alpha)(sigma omega^(alpha/(alpha-1))))
/// for a fixed positive-definite omega; a lower bound on the measured divergence.
double measured_renyi_objective(double alpha, const DenseMatrix& rho, const DenseMatrix& sigma,
                                const DenseMatrix& omega);

/// Measured Renyi divergence for alpha in (0,1), maximised over omega = exp(H).
MeasuredRenyiResult measured_renyi_divergence(double alpha, const DensityMatrix& rho, const DensityMatrix& sigma,
                                              const MeasuredRenyiConfig& cfg = {});

/// Tr^(1/p)(|sigma^(1/2p) x sigma^(1/2p)|^p). sigma must be positive definite,
/// and so must x when p < 0 (SingularArgument otherwise). With p < 0 the value is
/// computed as 1 / ||x^-1||_{-p,sigma}. `regularization` is applied to x first
/// when p < 0.
double weighted_lp_norm(const DenseMatrix& x, double p, const DenseMatrix& sigma, double regularization = 0.0);
double weighted_lp_norm(const ComplexMatrix& x, double p, const DensityMatrix& sigma, double regularization = 0.0);

}  // namespace qcap
