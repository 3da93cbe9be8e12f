#include "qcap/states.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qcap {

namespace {

DenseMatrix identity_dense(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return DenseMatrix::Identity(n, n);
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

}  // namespace

bool is_psd_within(const DenseMatrix& m, double tol) {
  const DenseMatrix shifted = 0.5 * (m + m.adjoint()) + tol * identity_dense(static_cast<std::size_t>(m.rows()));
  Eigen::LLT<DenseMatrix> llt(shifted);
  return llt.info() == Eigen::Success;
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  const double herm = m_.hermiticity_defect();
  if (herm > kDensityTol) {
    throw Error(ErrorCode::NotDensityMatrix, "not Hermitian (defect " + std::to_string(herm) + ")");
  }
  const Complex tr = m_.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > kDensityTol) {
    throw Error(ErrorCode::NotDensityMatrix, "trace " + std::to_string(tr.real()) + " != 1");
  }
  if (!is_psd_within(m_.mat(), kDensityTol)) {
    throw Error(ErrorCode::NotDensityMatrix, "eigenvalue below -1e-10");
  }
}

DensityMatrix DensityMatrix::pure(const DenseVector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw Error(ErrorCode::BadParameter, "zero state vector");
  const DenseVector unit = psi / norm;
  return DensityMatrix(ComplexMatrix(unit * unit.adjoint()));
}

DensityMatrix DensityMatrix::basis_state(std::size_t dim, std::size_t index) {
  if (index >= dim) throw Error(ErrorCode::BadParameter, "basis index out of range");
  DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return DensityMatrix(ComplexMatrix(std::move(m)));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  return DensityMatrix(ComplexMatrix(identity_dense(dim) / static_cast<double>(dim)));
}

DenseMatrix regularize(const DenseMatrix& x, double delta) {
  const auto d = static_cast<std::size_t>(x.rows());
  return (1.0 - delta) * x + (delta / static_cast<double>(d)) * identity_dense(d);
}

DensityMatrix regularize(const DensityMatrix& rho, double delta) {
  return DensityMatrix(regularize(rho.dense(), delta));
}

DensityMatrix tensor_product(std::span<const DensityMatrix> factors, std::size_t dimension_cap) {
  std::vector<ComplexMatrix> mats;
  mats.reserve(factors.size());
  for (const auto& f : factors) mats.push_back(f.matrix());
  return DensityMatrix(tensor_product(std::span<const ComplexMatrix>(mats), dimension_cap));
}

Povm::Povm(std::vector<ComplexMatrix> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw Error(ErrorCode::InvalidPovm, "empty POVM");
  const std::size_t d = elements_.front().dim();
  DenseMatrix sum = DenseMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const DenseMatrix id = identity_dense(d);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    if (e.dim() != d) throw Error(ErrorCode::InvalidPovm, "element dimensions differ");
    if (!e.is_hermitian(kPovmTol)) throw Error(ErrorCode::InvalidPovm, "element " + std::to_string(i) + " not Hermitian");
    if (!is_psd_within(e.mat(), kPovmTol) || !is_psd_within(id - e.mat(), kPovmTol)) {
      throw Error(ErrorCode::InvalidPovm, "element " + std::to_string(i) + " outside [0, I]");
    }
    sum += e.mat();
  }
  const double defect = (sum - id).cwiseAbs().maxCoeff();
  if (defect > kPovmTol) {
    throw Error(ErrorCode::InvalidPovm, "elements sum to I only within " + std::to_string(defect));
  }
}

Povm complete_povm(std::span<const ComplexMatrix> partial, std::size_t dim) {
  const DenseMatrix id = identity_dense(dim);
  DenseMatrix sum = DenseMatrix::Zero(id.rows(), id.cols());
  std::vector<ComplexMatrix> elements;
  elements.reserve(partial.size() + 1);
  for (const auto& e : partial) {
    if (e.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "POVM element dimension");
    if (!is_psd_within(e.mat(), kPovmTol) || !is_psd_within(id - e.mat(), kPovmTol)) {
      throw Error(ErrorCode::ElementsExceedIdentity, "element outside [0, I]");
    }
    sum += e.mat();
    elements.push_back(e);
  }
  const DenseMatrix rest = id - sum;
  if (!is_psd_within(rest, kPovmTol)) throw Error(ErrorCode::ElementsExceedIdentity, "sum of elements exceeds I");
  elements.emplace_back(0.5 * (rest + rest.adjoint()));
  return Povm(std::move(elements));
}

std::vector<DenseMatrix> QuantumChannel::kraus(std::size_t max_operators) const {
  double count = 1.0;
  for (std::size_t i = 0; i < copies_; ++i) count *= static_cast<double>(kraus_.size());
  if (count > static_cast<double>(max_operators)) {
    throw Error(ErrorCode::DimensionOverflow, "materialised Kraus set too large");
  }
  std::vector<DenseMatrix> acc = kraus_;
  for (std::size_t c = 1; c < copies_; ++c) {
    std::vector<DenseMatrix> next;
    next.reserve(acc.size() * kraus_.size());
    for (const auto& a : acc) {
      for (const auto& b : kraus_) next.push_back(kron(a, b));
    }
    acc = std::move(next);
  }
  return acc;
}

ComplexMatrix QuantumChannel::base_choi() const {
  const auto din = static_cast<Eigen::Index>(base_in_);
  const auto dout = static_cast<Eigen::Index>(base_out_);
  DenseMatrix c = DenseMatrix::Zero(din * dout, din * dout);
  for (const auto& k : kraus_) {
    DenseVector v(din * dout);
    for (Eigen::Index i = 0; i < din; ++i) {
      for (Eigen::Index a = 0; a < dout; ++a) v(i * dout + a) = k(a, i);
    }
    c += v * v.adjoint();
  }
  return ComplexMatrix(std::move(c));
}

QuantumChannel validate_channel(std::vector<DenseMatrix> kraus) {
  if (kraus.empty()) throw Error(ErrorCode::BadParameter, "empty Kraus list");
  const Eigen::Index dout = kraus.front().rows();
  const Eigen::Index din = kraus.front().cols();
  if (dout == 0 || din == 0) throw Error(ErrorCode::BadParameter, "empty Kraus operator");
  DenseMatrix sum = DenseMatrix::Zero(din, din);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din) throw Error(ErrorCode::BadParameter, "Kraus shapes differ");
    if (!k.allFinite()) throw Error(ErrorCode::BadParameter, "non-finite Kraus entry");
    sum += k.adjoint() * k;
  }
  const double tp_defect = (sum - DenseMatrix::Identity(din, din)).cwiseAbs().maxCoeff();
  if (tp_defect > kChannelTol) {
    throw Error(ErrorCode::NotTracePreserving, "max|sum K^dagger K - I| = " + std::to_string(tp_defect));
  }

  QuantumChannel ch;
  ch.kraus_ = std::move(kraus);
  ch.base_in_ = static_cast<std::size_t>(din);
  ch.base_out_ = static_cast<std::size_t>(dout);
  ch.dim_in_ = ch.base_in_;
  ch.dim_out_ = ch.base_out_;
  ch.copies_ = 1;

  const double min_choi = jacobi_eigensystem(ch.base_choi().mat()).values(0);
  if (min_choi < -kChannelTol) {
    throw Error(ErrorCode::NotCompletelyPositive, "min Choi eigenvalue " + std::to_string(min_choi));
  }
  ch.superop_ = kraus_superoperator(ch.kraus_);
  ch.adjoint_superop_ = ch.superop_.adjoint();
  return ch;
}

QuantumChannel channel_from_choi(const ComplexMatrix& choi, std::size_t dim_in, std::size_t dim_out) {
  if (choi.dim() != dim_in * dim_out) throw Error(ErrorCode::DimensionMismatch, "Choi dimension");
  if (!choi.is_hermitian(kChannelTol)) throw Error(ErrorCode::NotCompletelyPositive, "Choi matrix not Hermitian");
  const auto es = jacobi_eigensystem(choi.mat());
  if (es.values(0) < -kChannelTol) {
    throw Error(ErrorCode::NotCompletelyPositive, "min Choi eigenvalue " + std::to_string(es.values(0)));
  }
  const std::size_t dims[] = {dim_in, dim_out};
  const std::size_t keep[] = {0};
  const ComplexMatrix reduced = partial_trace(choi, dims, keep);
  const double tp_defect = (reduced.mat() - identity_dense(dim_in)).cwiseAbs().maxCoeff();
  if (tp_defect > kChannelTol) {
    throw Error(ErrorCode::NotTracePreserving, "Tr_out(Choi) differs from I by " + std::to_string(tp_defect));
  }
  const double cutoff = kKernelThreshold * es.max_abs_eigenvalue();
  std::vector<DenseMatrix> kraus;
  const auto din = static_cast<Eigen::Index>(dim_in);
  const auto dout = static_cast<Eigen::Index>(dim_out);
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    if (es.values(k) <= cutoff) continue;
    DenseMatrix op(dout, din);
    const double scale = std::sqrt(es.values(k));
    for (Eigen::Index i = 0; i < din; ++i) {
      for (Eigen::Index a = 0; a < dout; ++a) op(a, i) = scale * es.vectors(i * dout + a, k);
    }
    kraus.push_back(std::move(op));
  }
  return validate_channel(std::move(kraus));
}

QuantumChannel channel_tensor_power(const QuantumChannel& n, std::size_t k, std::size_t cap) {
  if (k == 0) throw Error(ErrorCode::BadParameter, "tensor power must be positive");
  const std::size_t total = n.copies_ * k;
  std::vector<std::size_t> in_dims(total, n.base_in_), out_dims(total, n.base_out_);
  QuantumChannel out = n;
  out.copies_ = total;
  out.dim_in_ = checked_product(in_dims, cap);
  out.dim_out_ = checked_product(out_dims, cap);
  // TP of the power: sum over products of K^dagger K factorises, so its
  // deviation from I is bounded by the base defect propagated over k factors.
  DenseMatrix sum = DenseMatrix::Zero(static_cast<Eigen::Index>(n.base_in_), static_cast<Eigen::Index>(n.base_in_));
  for (const auto& kr : n.kraus_) sum += kr.adjoint() * kr;
  const double base_defect = (sum - identity_dense(n.base_in_)).norm();
  const double propagated = std::pow(1.0 + base_defect, static_cast<double>(total)) - 1.0;
  if (propagated > kChannelTol) {
    throw Error(ErrorCode::NotTracePreserving, "tensor power loses trace preservation: " + std::to_string(propagated));
  }
  return out;
}

DenseMatrix apply_channel(const QuantumChannel& n, const DenseMatrix& x) {
  if (static_cast<std::size_t>(x.rows()) != n.dim_in() || x.rows() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "input dimension " + std::to_string(x.rows()) + " != channel dim_in " + std::to_string(n.dim_in()));
  }
  if (n.copies() == 1) {
    DenseMatrix y = DenseMatrix::Zero(static_cast<Eigen::Index>(n.dim_out()), static_cast<Eigen::Index>(n.dim_out()));
    for (const auto& k : n.base_kraus()) y.noalias() += k * x * k.adjoint();
    return y;
  }
  std::vector<std::size_t> dims(n.copies(), n.base_dim_in());
  DenseMatrix y = x;
  for (std::size_t slot = 0; slot < n.copies(); ++slot) {
    y = apply_on_slot(y, dims, slot, n.base_superoperator());
    dims[slot] = n.base_dim_out();
  }
  return y;
}

DensityMatrix apply_channel(const QuantumChannel& n, const DensityMatrix& rho) {
  DenseMatrix y = apply_channel(n, rho.dense());
  return DensityMatrix(ComplexMatrix(0.5 * (y + y.adjoint())));
}

DenseMatrix apply_adjoint(const QuantumChannel& n, const DenseMatrix& y) {
  if (static_cast<std::size_t>(y.rows()) != n.dim_out() || y.rows() != y.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "adjoint input dimension");
  }
  if (n.copies() == 1) {
    DenseMatrix x = DenseMatrix::Zero(static_cast<Eigen::Index>(n.dim_in()), static_cast<Eigen::Index>(n.dim_in()));
    for (const auto& k : n.base_kraus()) x.noalias() += k.adjoint() * y * k;
    return x;
  }
  std::vector<std::size_t> dims(n.copies(), n.base_dim_out());
  DenseMatrix x = y;
  for (std::size_t slot = 0; slot < n.copies(); ++slot) {
    x = apply_on_slot(x, dims, slot, n.base_adjoint_superoperator());
    dims[slot] = n.base_dim_in();
  }
  return x;
}

QuantumChannel identity_channel(std::size_t d) { return validate_channel({identity_dense(d)}); }

QuantumChannel depolarizing(std::size_t d, double p) {
  if (d == 0 || !(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::BadParameter, "depolarizing needs d >= 1, 0 <= p <= 1");
  const auto n = static_cast<Eigen::Index>(d);
  std::vector<DenseMatrix> kraus;
  if (p < 1.0) kraus.push_back(std::sqrt(1.0 - p) * identity_dense(d));
  if (p > 0.0) {
    const double w = std::sqrt(p) / static_cast<double>(d);
    const double two_pi_over_d = 2.0 * std::numbers::pi / static_cast<double>(d);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        // X^a Z^b : |j> -> omega^{b j} |j + a>
        DenseMatrix u = DenseMatrix::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
          u((j + a) % n, j) = std::polar(1.0, two_pi_over_d * static_cast<double>(b * j));
        }
        kraus.push_back(w * u);
      }
    }
  }
  return validate_channel(std::move(kraus));
}

QuantumChannel entanglement_breaking(const Povm& povm, std::span<const DensityMatrix> prep_states) {
  if (povm.size() != prep_states.size()) {
    throw Error(ErrorCode::BadParameter, "POVM and preparation lists differ in length");
  }
  const std::size_t dout = prep_states.empty() ? 0 : prep_states.front().dim();
  std::vector<DenseMatrix> kraus;
  for (std::size_t x = 0; x < povm.size(); ++x) {
    if (prep_states[x].dim() != dout) throw Error(ErrorCode::BadParameter, "preparation dimensions differ");
    const auto e = jacobi_eigensystem(povm[x].mat());
    const auto s = jacobi_eigensystem(prep_states[x].dense());
    const double ecut = kKernelThreshold * std::max(1.0, e.max_abs_eigenvalue());
    const double scut = kKernelThreshold * std::max(1.0, s.max_abs_eigenvalue());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
      if (e.values(i) <= ecut) continue;
      for (Eigen::Index j = 0; j < s.values.size(); ++j) {
        if (s.values(j) <= scut) continue;
        kraus.push_back(std::sqrt(e.values(i) * s.values(j)) * s.vectors.col(j) * e.vectors.col(i).adjoint());
      }
    }
  }
  if (kraus.empty()) throw Error(ErrorCode::BadParameter, "entanglement-breaking channel has no Kraus operators");
  return validate_channel(std::move(kraus));
}

QuantumChannel cq_channel(std::span<const DensityMatrix> signal_states, const Povm* povm) {
  if (signal_states.empty()) throw Error(ErrorCode::BadParameter, "no signal states");
  if (povm != nullptr) return entanglement_breaking(*povm, signal_states);
  const std::size_t din = signal_states.size();
  std::vector<ComplexMatrix> basis;
  for (std::size_t i = 0; i < din; ++i) basis.push_back(DensityMatrix::basis_state(din, i).matrix());
  return entanglement_breaking(Povm(std::move(basis)), signal_states);
}

QuantumChannel constant_channel(const DensityMatrix& sigma, std::size_t dim_in) {
  if (dim_in == 0) throw Error(ErrorCode::BadParameter, "dim_in must be positive");
  return entanglement_breaking(Povm({ComplexMatrix::identity(dim_in)}), std::span<const DensityMatrix>(&sigma, 1));
}

void Ensemble::validate() const {
  if (probs.empty() || probs.size() != states.size()) {
    throw Error(ErrorCode::BadParameter, "ensemble needs matching non-empty probs/states");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw Error(ErrorCode::BadParameter, "negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw Error(ErrorCode::BadParameter, "probabilities sum to " + std::to_string(total));
  for (const auto& s : states) {
    if (s.dim() != states.front().dim()) throw Error(ErrorCode::DimensionMismatch, "ensemble state dimensions differ");
  }
}

DensityMatrix ensemble_average(std::span<const double> probs, std::span<const DensityMatrix> states) {
  if (probs.size() != states.size() || states.empty()) {
    throw Error(ErrorCode::BadParameter, "ensemble_average needs matching non-empty lists");
  }
  DenseMatrix acc = DenseMatrix::Zero(states.front().dense().rows(), states.front().dense().cols());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].dim() != states.front().dim()) throw Error(ErrorCode::DimensionMismatch, "state dimensions differ");
    acc += probs[i] * states[i].dense();
  }
  return DensityMatrix(ComplexMatrix(0.5 * (acc + acc.adjoint())));
}

}  // namespace qcap
