#pragma once

// Density matrices, POVMs, CPTP channels in Kraus form and ensembles.

#include <cstddef>
#include <span>
#include <vector>

#include "qcap/matrix.hpp"

namespace qcap {

inline constexpr double kDensityTol = 1e-10;
inline constexpr double kPovmTol = 1e-9;
inline constexpr double kChannelTol = 1e-9;

/// Hermitian, PSD, unit-trace matrix (each within kDensityTol).
class DensityMatrix {
 public:
  /// Throws NotDensityMatrix when an invariant fails.
  explicit DensityMatrix(ComplexMatrix m);
  explicit DensityMatrix(DenseMatrix m) : DensityMatrix(ComplexMatrix(std::move(m))) {}

  static DensityMatrix pure(const DenseVector& psi);
  static DensityMatrix basis_state(std::size_t dim, std::size_t index);
  static DensityMatrix maximally_mixed(std::size_t dim);

  std::size_t dim() const noexcept { return m_.dim(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  const DenseMatrix& dense() const noexcept { return m_.mat(); }

 private:
  ComplexMatrix m_;
};

/// (1 - delta) X + delta I / d
DenseMatrix regularize(const DenseMatrix& x, double delta);
DensityMatrix regularize(const DensityMatrix& rho, double delta);

DensityMatrix tensor_product(std::span<const DensityMatrix> factors,
                             std::size_t dimension_cap = kDefaultDimensionCap);

/// True iff lambda_min(m + tol I) > 0, via Cholesky (cheap PSD screening).
bool is_psd_within(const DenseMatrix& m, double tol);

class Povm {
 public:
  /// Throws InvalidPovm when some element leaves [0, I] or the sum differs
  /// from I by more than kPovmTol (entrywise).
  explicit Povm(std::vector<ComplexMatrix> elements);

  std::size_t size() const noexcept { return elements_.size(); }
  std::size_t dim() const noexcept { return elements_.front().dim(); }
  const ComplexMatrix& operator[](std::size_t i) const { return elements_.at(i); }
  const std::vector<ComplexMatrix>& elements() const noexcept { return elements_; }

 private:
  std::vector<ComplexMatrix> elements_;
};

/// Appends I - sum(partial) as a discard outcome. Throws
/// ElementsExceedIdentity when the partial sum is not below I.
Povm complete_povm(std::span<const ComplexMatrix> partial, std::size_t dim);

/// CPTP map in Kraus form. A channel may be a tensor power N^{(x)k} of a base
/// Kraus set; its action is then evaluated factor by factor and the k-fold
/// Kraus products are only materialised on request.
class QuantumChannel {
 public:
  std::size_t dim_in() const noexcept { return dim_in_; }
  std::size_t dim_out() const noexcept { return dim_out_; }
  std::size_t base_dim_in() const noexcept { return base_in_; }
  std::size_t base_dim_out() const noexcept { return base_out_; }
  std::size_t copies() const noexcept { return copies_; }
  const std::vector<DenseMatrix>& base_kraus() const noexcept { return kraus_; }

  /// All k-fold products of the base Kraus operators. DimensionOverflow when
  /// the materialised set would exceed `max_operators`.
  std::vector<DenseMatrix> kraus(std::size_t max_operators = 4096) const;

  /// d_out^2 x d_in^2 row-major superoperator of the base channel.
  const DenseMatrix& base_superoperator() const noexcept { return superop_; }
  const DenseMatrix& base_adjoint_superoperator() const noexcept { return adjoint_superop_; }

  /// Choi matrix sum_ij |i><j| (x) N(|i><j|) of the base channel.
  ComplexMatrix base_choi() const;

  friend QuantumChannel validate_channel(std::vector<DenseMatrix> kraus);
  friend QuantumChannel channel_tensor_power(const QuantumChannel& n, std::size_t k, std::size_t cap);

 private:
  QuantumChannel() = default;

  std::vector<DenseMatrix> kraus_;
  DenseMatrix superop_;
  DenseMatrix adjoint_superop_;
  std::size_t base_in_ = 0;
  std::size_t base_out_ = 0;
  std::size_t copies_ = 1;
  std::size_t dim_in_ = 0;
  std::size_t dim_out_ = 0;
};

/// Checks sum K^dagger K = I (NotTracePreserving) and Choi >= 0
/// (NotCompletelyPositive, message carries the minimum Choi eigenvalue).
QuantumChannel validate_channel(std::vector<DenseMatrix> kraus);

/// Builds a channel from a Choi matrix on C^{d_in} (x) C^{d_out}; the CP and TP
/// checks operate on the Choi matrix directly.
QuantumChannel channel_from_choi(const ComplexMatrix& choi, std::size_t dim_in, std::size_t dim_out);

QuantumChannel channel_tensor_power(const QuantumChannel& n, std::size_t k,
                                    std::size_t cap = kDefaultDimensionCap);

DensityMatrix apply_channel(const QuantumChannel& n, const DensityMatrix& rho);
/// Linear action on an arbitrary operator of dimension dim_in.
DenseMatrix apply_channel(const QuantumChannel& n, const DenseMatrix& x);
/// Heisenberg-picture action sum K^dagger Y K.
DenseMatrix apply_adjoint(const QuantumChannel& n, const DenseMatrix& y);

// Standard families.
QuantumChannel identity_channel(std::size_t d);
/// sqrt(1-p) I together with sqrt(p/d^2) times the d^2 clock-shift unitaries.
QuantumChannel depolarizing(std::size_t d, double p);
/// rho -> sum_x Tr(E_x rho) sigma_x
QuantumChannel entanglement_breaking(const Povm& povm, std::span<const DensityMatrix> prep_states);
/// Classical-quantum channel: measures the input in `povm` (computational
/// basis when empty) and prepares the matching signal state.
QuantumChannel cq_channel(std::span<const DensityMatrix> signal_states, const Povm* povm = nullptr);
QuantumChannel constant_channel(const DensityMatrix& sigma, std::size_t dim_in);

struct Ensemble {
  std::vector<double> probs;
  std::vector<DensityMatrix> states;

  /// Throws BadParameter unless sizes match, probs >= 0 and sum to 1 within 1e-10.
  void validate() const;
  std::size_t size() const noexcept { return probs.size(); }
};

/// sum_x p_x rho_x
DensityMatrix ensemble_average(std::span<const double> probs, std::span<const DensityMatrix> states);

}  // namespace qcap
