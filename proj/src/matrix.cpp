#include "qcap/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qcap {

namespace {

constexpr int kMaxJacobiSweeps = 64;

bool all_finite(const DenseMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(op) + ": " + std::to_string(a.dim()) +
                                                  " vs " + std::to_string(b.dim()));
  }
}

bool is_integer(double p) { return std::floor(p) == p; }

}  // namespace

ComplexMatrix::ComplexMatrix(DenseMatrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw Error(ErrorCode::BadParameter, "matrix must be square with dim >= 1");
  }
  if (!all_finite(m_)) throw Error(ErrorCode::BadParameter, "matrix has non-finite entries");
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return ComplexMatrix(DenseMatrix::Identity(d, d));
}

ComplexMatrix ComplexMatrix::zero(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return ComplexMatrix(DenseMatrix::Zero(d, d));
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  const auto d = static_cast<Eigen::Index>(values.size());
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) m(i, i) = values[static_cast<std::size_t>(i)];
  return ComplexMatrix(std::move(m));
}

ComplexMatrix ComplexMatrix::projector(const DenseVector& psi) {
  return ComplexMatrix(psi * psi.adjoint());
}

ComplexMatrix ComplexMatrix::from_row_major(std::size_t dim, std::span<const Complex> entries) {
  if (entries.size() != dim * dim) {
    throw Error(ErrorCode::BadParameter, "expected " + std::to_string(dim * dim) + " entries, got " +
                                             std::to_string(entries.size()));
  }
  const auto d = static_cast<Eigen::Index>(dim);
  DenseMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = entries[static_cast<std::size_t>(i * d + j)];
  }
  return ComplexMatrix(std::move(m));
}

double ComplexMatrix::hermiticity_defect() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

std::vector<Complex> ComplexMatrix::row_major_entries() const {
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(m_.size()));
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    for (Eigen::Index j = 0; j < m_.cols(); ++j) out.push_back(m_(i, j));
  }
  return out;
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "operator+");
  return ComplexMatrix(a.m_ + b.m_);
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "operator-");
  return ComplexMatrix(a.m_ - b.m_);
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "operator*");
  return ComplexMatrix(a.m_ * b.m_);
}

ComplexMatrix operator*(Complex s, const ComplexMatrix& a) { return ComplexMatrix(s * a.m_); }

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "max_abs_diff");
  return (a.mat() - b.mat()).cwiseAbs().maxCoeff();
}

DenseMatrix HermitianEigensystem::reconstruct() const {
  return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

double HermitianEigensystem::max_abs_eigenvalue() const {
  return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
}

HermitianEigensystem jacobi_eigensystem(const DenseMatrix& hermitian) {
  const Eigen::Index n = hermitian.rows();
  DenseMatrix a = 0.5 * (hermitian + hermitian.adjoint());
  DenseMatrix v = DenseMatrix::Identity(n, n);

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (Eigen::Index q = 0; q < n; ++q) {
      diag += std::norm(a(q, q));
      for (Eigen::Index p = 0; p < q; ++p) off += std::norm(a(p, q));
    }
    if (off == 0.0 || off <= 1e-34 * (diag + 2.0 * off)) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        if (mag < 1e-300 || mag <= 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex u = std::conj(apq) / mag;  // e^{-i phi}
        const Complex g10 = -s * u;
        const Complex g11 = c * u;

        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * c + akq * g10;
          a(k, q) = akp * s + akq * g11;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk + std::conj(g10) * aqk;
          a(q, k) = s * apk + std::conj(g11) * aqk;
        }
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = vkp * c + vkq * g10;
          v(k, q) = vkp * s + vkq * g11;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });

  HermitianEigensystem es;
  es.values.resize(n);
  es.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    es.values(k) = a(src, src).real();
    es.vectors.col(k) = v.col(src);
  }
  return es;
}

HermitianEigensystem eig_hermitian(const ComplexMatrix& m, double hermiticity_tol) {
  const double defect = m.hermiticity_defect();
  if (defect > hermiticity_tol) {
    throw Error(ErrorCode::NotHermitian, "max|m - m^dagger| = " + std::to_string(defect));
  }
  return jacobi_eigensystem(m.mat());
}

DenseMatrix apply_function(const HermitianEigensystem& es, ScalarFunction f, KernelPolicy policy,
                           double kernel_threshold) {
  const double cutoff = kernel_threshold * es.max_abs_eigenvalue();
  RealVector mapped(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double lambda = es.values(i);
    const bool in_kernel = std::abs(lambda) <= cutoff;
    switch (f.kind) {
      case ScalarFunction::Kind::Abs:
        mapped(i) = std::abs(lambda);
        break;
      case ScalarFunction::Kind::Log:
        if (in_kernel) {
          if (policy == KernelPolicy::Error) throw Error(ErrorCode::SingularMatrix, "log on kernel");
          mapped(i) = 0.0;
        } else if (lambda < 0.0) {
          throw Error(ErrorCode::BadParameter, "log of negative eigenvalue " + std::to_string(lambda));
        } else {
          mapped(i) = std::log(lambda);
        }
        break;
      case ScalarFunction::Kind::Pow:
        if (in_kernel) {
          if (f.exponent <= 0.0 && policy == KernelPolicy::Error) {
            throw Error(ErrorCode::SingularMatrix, "non-positive power on kernel");
          }
          mapped(i) = 0.0;
        } else if (lambda < 0.0 && !is_integer(f.exponent)) {
          throw Error(ErrorCode::BadParameter,
                      "fractional power of negative eigenvalue " + std::to_string(lambda));
        } else {
          mapped(i) = std::pow(lambda, f.exponent);
        }
        break;
    }
  }
  return es.vectors * mapped.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

ComplexMatrix matrix_function(const ComplexMatrix& m, ScalarFunction f, KernelPolicy policy,
                              double kernel_threshold) {
  return ComplexMatrix(apply_function(eig_hermitian(m), f, policy, kernel_threshold));
}

std::size_t checked_product(std::span<const std::size_t> dims, std::size_t cap) {
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw Error(ErrorCode::BadParameter, "zero subsystem dimension");
    if (total > cap / d) {
      throw Error(ErrorCode::DimensionOverflow, "product dimension exceeds cap " + std::to_string(cap));
    }
    total *= d;
  }
  if (total > cap) {
    throw Error(ErrorCode::DimensionOverflow, "product dimension exceeds cap " + std::to_string(cap));
  }
  return total;
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t dimension_cap) {
  const std::size_t dims[] = {a.dim(), b.dim()};
  checked_product(dims, dimension_cap);
  const Eigen::Index da = a.mat().rows();
  const Eigen::Index db = b.mat().rows();
  DenseMatrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a.mat()(i, j) * b.mat();
  }
  return ComplexMatrix(std::move(out));
}

ComplexMatrix tensor_product(std::span<const ComplexMatrix> factors, std::size_t dimension_cap) {
  if (factors.empty()) throw Error(ErrorCode::BadParameter, "tensor_product of empty list");
  ComplexMatrix acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = tensor_product(acc, factors[i], dimension_cap);
  return acc;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
  std::size_t total = 1;
  for (std::size_t d : dims) total *= d;
  if (dims.empty() || total != m.dim()) {
    throw Error(ErrorCode::BadFactorization, "subsystem dimensions do not multiply to " + std::to_string(m.dim()));
  }
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size()) throw Error(ErrorCode::BadFactorization, "keep index out of range");
    kept[k] = true;
  }
  // strides of each subsystem in the full index
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) stride[i - 1] = stride[i] * dims[i];

  std::vector<std::size_t> keep_dims, trace_dims, keep_stride, trace_stride;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    (kept[i] ? keep_dims : trace_dims).push_back(dims[i]);
    (kept[i] ? keep_stride : trace_stride).push_back(stride[i]);
  }
  auto offsets = [](const std::vector<std::size_t>& ds, const std::vector<std::size_t>& st) {
    std::vector<std::size_t> out{0};
    for (std::size_t i = 0; i < ds.size(); ++i) {
      std::vector<std::size_t> next;
      next.reserve(out.size() * ds[i]);
      for (std::size_t base : out) {
        for (std::size_t v = 0; v < ds[i]; ++v) next.push_back(base + v * st[i]);
      }
      out = std::move(next);
    }
    return out;
  };
  const auto keep_off = offsets(keep_dims, keep_stride);
  const auto trace_off = offsets(trace_dims, trace_stride);
  const auto dk = static_cast<Eigen::Index>(keep_off.size());
  DenseMatrix out = DenseMatrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r) {
    for (Eigen::Index c = 0; c < dk; ++c) {
      Complex acc = 0.0;
      for (std::size_t t : trace_off) {
        acc += m.mat()(static_cast<Eigen::Index>(keep_off[static_cast<std::size_t>(r)] + t),
                       static_cast<Eigen::Index>(keep_off[static_cast<std::size_t>(c)] + t));
      }
      out(r, c) = acc;
    }
  }
  return ComplexMatrix(std::move(out));
}

double min_eigenvalue(const ComplexMatrix& m) { return eig_hermitian(m, 1e-8).values(0); }

bool loewner_leq(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  require_same_dim(a, b, "loewner_leq");
  return jacobi_eigensystem((b - a).mat()).values(0) >= -tol;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "trace_distance");
  return 0.5 * jacobi_eigensystem((a - b).mat()).values.cwiseAbs().sum();
}

DenseMatrix apply_on_slot(const DenseMatrix& x, std::span<const std::size_t> dims, std::size_t slot,
                          const DenseMatrix& superop) {
  if (slot >= dims.size()) throw Error(ErrorCode::DimensionMismatch, "slot index out of range");
  std::size_t left = 1, right = 1;
  for (std::size_t i = 0; i < slot; ++i) left *= dims[i];
  for (std::size_t i = slot + 1; i < dims.size(); ++i) right *= dims[i];
  const std::size_t din = dims[slot];
  const auto din2 = static_cast<Eigen::Index>(din * din);
  if (static_cast<std::size_t>(x.rows()) != left * din * right || superop.cols() != din2) {
    throw Error(ErrorCode::DimensionMismatch, "apply_on_slot: operator does not match factor dimensions");
  }
  const auto dout = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(superop.rows()))));
  if (static_cast<Eigen::Index>(dout * dout) != superop.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "apply_on_slot: superoperator rows not a square");
  }
  const std::size_t out_dim = left * dout * right;
  DenseMatrix y = DenseMatrix::Zero(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(out_dim));
  DenseVector block_in(din2);
  for (std::size_t l1 = 0; l1 < left; ++l1) {
    for (std::size_t r1 = 0; r1 < right; ++r1) {
      for (std::size_t l2 = 0; l2 < left; ++l2) {
        for (std::size_t r2 = 0; r2 < right; ++r2) {
          for (std::size_t i = 0; i < din; ++i) {
            for (std::size_t j = 0; j < din; ++j) {
              block_in(static_cast<Eigen::Index>(i * din + j)) =
                  x(static_cast<Eigen::Index>((l1 * din + i) * right + r1),
                    static_cast<Eigen::Index>((l2 * din + j) * right + r2));
            }
          }
          const DenseVector block_out = superop * block_in;
          for (std::size_t a = 0; a < dout; ++a) {
            for (std::size_t b = 0; b < dout; ++b) {
              y(static_cast<Eigen::Index>((l1 * dout + a) * right + r1),
                static_cast<Eigen::Index>((l2 * dout + b) * right + r2)) =
                  block_out(static_cast<Eigen::Index>(a * dout + b));
            }
          }
        }
      }
    }
  }
  return y;
}

DenseMatrix kraus_superoperator(std::span<const DenseMatrix> kraus) {
  if (kraus.empty()) throw Error(ErrorCode::BadParameter, "empty Kraus list");
  const Eigen::Index dout = kraus.front().rows();
  const Eigen::Index din = kraus.front().cols();
  DenseMatrix s = DenseMatrix::Zero(dout * dout, din * din);
  for (const auto& k : kraus) {
    const DenseMatrix kc = k.conjugate();
    for (Eigen::Index a = 0; a < dout; ++a) {
      for (Eigen::Index i = 0; i < din; ++i) s.block(a * dout, i * din, dout, din) += k(a, i) * kc;
    }
  }
  return s;
}

}  // namespace qcap
