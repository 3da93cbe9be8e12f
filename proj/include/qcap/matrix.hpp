#pragma once

// Dense complex-matrix kernel: Hermitian eigendecomposition (cyclic Jacobi),
// spectral matrix functions, tensor algebra and Loewner-order tests.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcap/error.hpp"

namespace qcap {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Eigenvalues at or below this fraction of the largest |eigenvalue| are
/// treated as kernel (defines supp(.)).
inline constexpr double kKernelThreshold = 1e-12;
inline constexpr std::size_t kDefaultDimensionCap = 4096;

/// Square complex matrix with finite entries. Immutable value type: every
/// operation returns a fresh matrix.
class ComplexMatrix {
 public:
  /// Throws BadParameter if `m` is not square, empty, or has non-finite entries.
  explicit ComplexMatrix(DenseMatrix m);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix zero(std::size_t dim);
  static ComplexMatrix diagonal(std::span<const double> values);
  /// |psi><psi| (not normalized).
  static ComplexMatrix projector(const DenseVector& psi);
  static ComplexMatrix from_row_major(std::size_t dim, std::span<const Complex> entries);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const DenseMatrix& mat() const noexcept { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  Complex trace() const { return m_.trace(); }
  ComplexMatrix adjoint() const { return ComplexMatrix(m_.adjoint()); }
  /// max_ij |m_ij - conj(m_ji)|
  double hermiticity_defect() const;
  bool is_hermitian(double tol) const { return hermiticity_defect() <= tol; }
  std::vector<Complex> row_major_entries() const;

  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend ComplexMatrix operator*(Complex s, const ComplexMatrix& a);
  friend ComplexMatrix operator*(const ComplexMatrix& a, Complex s) { return s * a; }

 private:
  DenseMatrix m_;
};

/// max_ij |a_ij - b_ij|; dimensions must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

struct HermitianEigensystem {
  RealVector values;    // non-decreasing
  DenseMatrix vectors;  // unitary, columns are eigenvectors

  std::size_t dim() const noexcept { return static_cast<std::size_t>(values.size()); }
  DenseMatrix reconstruct() const;
  double max_abs_eigenvalue() const;
};

/// Cyclic Jacobi on (m + m^dagger)/2. Throws NotHermitian when
/// max|m - m^dagger| > hermiticity_tol.
HermitianEigensystem eig_hermitian(const ComplexMatrix& m, double hermiticity_tol = 1e-10);

/// Unchecked variant for internal callers that already hold a Hermitian matrix.
HermitianEigensystem jacobi_eigensystem(const DenseMatrix& hermitian);

enum class KernelPolicy { ZeroOnKernel, Error };

struct ScalarFunction {
  enum class Kind { Log, Pow, Abs };
  Kind kind = Kind::Abs;
  double exponent = 1.0;

  static ScalarFunction log() { return {Kind::Log, 0.0}; }
  static ScalarFunction pow(double p) { return {Kind::Pow, p}; }
  static ScalarFunction abs() { return {Kind::Abs, 1.0}; }
};

/// Applies `f` to the spectrum. Eigenvalues with |lambda| <= kernel_threshold *
/// max|lambda| are kernel: mapped to zero under ZeroOnKernel; under Error a log
/// or non-positive power raises SingularMatrix. Log and fractional powers of
/// eigenvalues that are negative beyond the kernel raise BadParameter.
ComplexMatrix matrix_function(const ComplexMatrix& m, ScalarFunction f,
                              KernelPolicy policy = KernelPolicy::ZeroOnKernel,
                              double kernel_threshold = kKernelThreshold);

DenseMatrix apply_function(const HermitianEigensystem& es, ScalarFunction f,
                           KernelPolicy policy = KernelPolicy::ZeroOnKernel,
                           double kernel_threshold = kKernelThreshold);

/// Kronecker product; DimensionOverflow if dim(a)*dim(b) > dimension_cap.
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b,
                             std::size_t dimension_cap = kDefaultDimensionCap);
ComplexMatrix tensor_product(std::span<const ComplexMatrix> factors,
                             std::size_t dimension_cap = kDefaultDimensionCap);

/// Traces out every subsystem not listed in `keep` (kept order follows `dims`).
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

/// True iff lambda_min(b - a) >= -tol.
bool loewner_leq(const ComplexMatrix& a, const ComplexMatrix& b, double tol);

double min_eigenvalue(const ComplexMatrix& m);
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// Applies a single-subsystem linear map to subsystem `slot` of an operator on
/// the product space with factor dimensions `dims`. `superop` is
/// d_out^2 x d_in^2 acting on row-major vectorisations: vec(X)[i*d+j] = X(i,j).
DenseMatrix apply_on_slot(const DenseMatrix& x, std::span<const std::size_t> dims,
                          std::size_t slot, const DenseMatrix& superop);

/// Row-major superoperator of X -> K X K^dagger summed over `kraus`.
DenseMatrix kraus_superoperator(std::span<const DenseMatrix> kraus);

std::size_t checked_product(std::span<const std::size_t> dims, std::size_t cap);

}  // namespace qcap
