#include "qcap/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qcap {

namespace {

DenseMatrix spectral_map(const HermitianEigensystem& es, const RealVector& mapped) {
  return es.vectors * mapped.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

double real_trace_product(const DenseMatrix& a, const DenseMatrix& b) {
  // Re Tr(a b) without forming the product
  return (a.transpose().array() * b.array()).sum().real();
}

// Hermitian d x d matrix from d^2 real coordinates: diagonal first, then
// (re, im) of each upper-triangular entry.
DenseMatrix hermitian_from_coords(const RealVector& x, Eigen::Index d) {
  DenseMatrix h = DenseMatrix::Zero(d, d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) h(i, i) = x(k++);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const Complex z(x(k), x(k + 1));
      k += 2;
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

RealVector coords_from_hermitian(const DenseMatrix& h) {
  const Eigen::Index d = h.rows();
  RealVector x(d * d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) x(k++) = h(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      x(k++) = 0.5 * (h(i, j).real() + h(j, i).real());
      x(k++) = 0.5 * (h(i, j).imag() - h(j, i).imag());
    }
  }
  return x;
}

// ln sum_k w_k exp(c * lambda_k) for w_k > 0
double log_weighted_exp(const RealVector& w, const RealVector& lambda, double c) {
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w(k) > 0.0) shift = std::max(shift, c * lambda(k));
  }
  double acc = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w(k) > 0.0) acc += w(k) * std::exp(c * lambda(k) - shift);
  }
  return shift + std::log(acc);
}

class MeasuredObjective {
 public:
  MeasuredObjective(double alpha, const DenseMatrix& rho, const DenseMatrix& sigma)
      : alpha_(alpha), hat_(alpha / (alpha - 1.0)), rho_(rho), sigma_(sigma) {}

  // alpha ln Tr(rho e^H) + (1 - alpha) ln Tr(sigma e^{hat H}); smaller is better.
  double operator()(const DenseMatrix& h) const {
    const auto es = jacobi_eigensystem(h);
    const RealVector r = (es.vectors.adjoint() * rho_ * es.vectors).diagonal().real();
    const RealVector s = (es.vectors.adjoint() * sigma_ * es.vectors).diagonal().real();
    return alpha_ * log_weighted_exp(r, es.values, 1.0) + (1.0 - alpha_) * log_weighted_exp(s, es.values, hat_);
  }

  double to_divergence(double f) const { return f / (alpha_ - 1.0); }

 private:
  double alpha_;
  double hat_;
  const DenseMatrix& rho_;
  const DenseMatrix& sigma_;
};

void require_same_dim(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": " + std::to_string(a.rows()) + " vs " +
                                                  std::to_string(b.rows()));
  }
}

bool positive_definite(const HermitianEigensystem& es) {
  return es.values(0) > kKernelThreshold * es.max_abs_eigenvalue();
}

}  // namespace

DivergenceValue DivergenceValue::infinite() { return {std::numeric_limits<double>::infinity(), true}; }

double entropy_of_spectrum(const RealVector& eigenvalues) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double l = eigenvalues(i);
    if (l > 0.0) s -= l * std::log(l);
  }
  return s;
}

double von_neumann_entropy(const DenseMatrix& rho) { return entropy_of_spectrum(jacobi_eigensystem(rho).values); }

double von_neumann_entropy(const DensityMatrix& rho) { return von_neumann_entropy(rho.dense()); }

DivergenceReference::DivergenceReference(const DenseMatrix& sigma) {
  const auto es = jacobi_eigensystem(sigma);
  const double cutoff = kKernelThreshold * es.max_abs_eigenvalue();
  RealVector logs(es.values.size());
  RealVector ker(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const bool in_kernel = es.values(i) <= cutoff;
    logs(i) = in_kernel ? 0.0 : std::log(es.values(i));
    ker(i) = in_kernel ? 1.0 : 0.0;
    if (in_kernel) ++kernel_rank_;
  }
  log_sigma_ = spectral_map(es, logs);
  if (kernel_rank_ > 0) kernel_projector_ = spectral_map(es, ker);
}

double DivergenceReference::support_leak(const DenseMatrix& rho) const {
  if (kernel_rank_ == 0) return 0.0;
  return real_trace_product(kernel_projector_, rho);
}

DivergenceValue DivergenceReference::relative_entropy(const DenseMatrix& rho, double rho_entropy) const {
  require_same_dim(rho, log_sigma_, "relative_entropy");
  if (support_leak(rho) > kSupportLeakTol) return DivergenceValue::infinite();
  return DivergenceValue::finite(-rho_entropy - real_trace_product(rho, log_sigma_));
}

DivergenceValue DivergenceReference::relative_entropy(const DenseMatrix& rho) const {
  require_same_dim(rho, log_sigma_, "relative_entropy");
  if (support_leak(rho) > kSupportLeakTol) return DivergenceValue::infinite();
  return relative_entropy(rho, von_neumann_entropy(rho));
}

DivergenceValue relative_entropy(const DenseMatrix& rho, const DenseMatrix& sigma) {
  require_same_dim(rho, sigma, "relative_entropy");
  return DivergenceReference(sigma).relative_entropy(rho);
}

DivergenceValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return relative_entropy(rho.dense(), sigma.dense());
}

HolevoForms holevo_forms(std::span<const double> probs, std::span<const DensityMatrix> outputs) {
  if (probs.size() != outputs.size() || outputs.empty()) {
    throw Error(ErrorCode::BadParameter, "probabilities and states differ in length");
  }
  const DensityMatrix avg = ensemble_average(probs, outputs);
  const DivergenceReference ref(avg.dense());
  HolevoForms f;
  f.entropy_form = von_neumann_entropy(avg);
  for (std::size_t x = 0; x < outputs.size(); ++x) {
    if (probs[x] == 0.0) continue;
    const double s = von_neumann_entropy(outputs[x]);
    f.entropy_form -= probs[x] * s;
    const auto d = ref.relative_entropy(outputs[x].dense(), s);
    if (!d.is_finite()) {
      throw Error(ErrorCode::InternalInconsistency, "ensemble member leaves the support of its own average");
    }
    f.divergence_form += probs[x] * d.value;
  }
  return f;
}

namespace {

double checked_holevo(std::span<const double> probs, std::span<const DensityMatrix> outputs) {
  const auto f = holevo_forms(probs, outputs);
  const double gap = std::abs(f.entropy_form - f.divergence_form);
  if (gap > 1e-6) {
    throw Error(ErrorCode::InternalInconsistency,
                "entropy and divergence forms of chi differ by " + std::to_string(gap));
  }
  return f.divergence_form;
}

}  // namespace

double holevo_quantity(const Ensemble& e, const QuantumChannel& n) {
  e.validate();
  std::vector<DensityMatrix> outputs;
  outputs.reserve(e.size());
  for (const auto& s : e.states) outputs.push_back(apply_channel(n, s));
  return checked_holevo(e.probs, outputs);
}

double cq_mutual_information(std::span<const double> probs, std::span<const DensityMatrix> output_states) {
  Ensemble e{std::vector<double>(probs.begin(), probs.end()),
             std::vector<DensityMatrix>(output_states.begin(), output_states.end())};
  e.validate();
  return checked_holevo(probs, output_states);
}

DivergenceValue petz_renyi_divergence(double alpha, const DenseMatrix& rho, const DenseMatrix& sigma) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw Error(ErrorCode::BadParameter, "Petz-Renyi order must lie in (0,1) or (1,inf)");
  }
  require_same_dim(rho, sigma, "petz_renyi_divergence");
  const auto er = jacobi_eigensystem(rho);
  const auto es = jacobi_eigensystem(sigma);
  if (alpha > 1.0) {
    const double cutoff = kKernelThreshold * es.max_abs_eigenvalue();
    RealVector ker(es.values.size());
    for (Eigen::Index i = 0; i < ker.size(); ++i) ker(i) = es.values(i) <= cutoff ? 1.0 : 0.0;
    if (ker.sum() > 0.0 && real_trace_product(spectral_map(es, ker), rho) > kSupportLeakTol) {
      return DivergenceValue::infinite();
    }
  }
  const DenseMatrix ra = apply_function(er, ScalarFunction::pow(alpha));
  const DenseMatrix sb = apply_function(es, ScalarFunction::pow(1.0 - alpha));
  const double q = real_trace_product(ra, sb);
  if (!(q > 0.0)) return DivergenceValue::infinite();
  return DivergenceValue::finite(std::log(q) / (alpha - 1.0));
}

DivergenceValue petz_renyi_divergence(double alpha, const DensityMatrix& rho, const DensityMatrix& sigma) {
  return petz_renyi_divergence(alpha, rho.dense(), sigma.dense());
}

double measured_renyi_objective(double alpha, const DenseMatrix& rho, const DenseMatrix& sigma,
                                const DenseMatrix& omega) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::BadParameter, "measured Renyi order must lie in (0,1)");
  require_same_dim(rho, sigma, "measured_renyi_objective");
  require_same_dim(rho, omega, "measured_renyi_objective");
  const auto eo = jacobi_eigensystem(omega);
  if (!positive_definite(eo) || eo.values(0) <= 0.0) {
    throw Error(ErrorCode::SingularArgument, "omega must be positive definite");
  }
  RealVector logs = eo.values.array().log().matrix();
  HermitianEigensystem log_es{logs, eo.vectors};
  return MeasuredObjective(alpha, rho, sigma).to_divergence(
      MeasuredObjective(alpha, rho, sigma)(log_es.reconstruct()));
}

MeasuredRenyiResult measured_renyi_divergence(double alpha, const DensityMatrix& rho_in,
                                              const DensityMatrix& sigma_in, const MeasuredRenyiConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::BadParameter, "measured Renyi order must lie in (0,1)");
  if (rho_in.dim() != sigma_in.dim()) throw Error(ErrorCode::DimensionMismatch, "measured_renyi_divergence");
  const DenseMatrix rho = regularize(rho_in.dense(), cfg.regularization);
  const DenseMatrix sigma = regularize(sigma_in.dense(), cfg.regularization);
  const auto er = jacobi_eigensystem(rho);
  const auto es = jacobi_eigensystem(sigma);
  if (!positive_definite(er) || !positive_definite(es)) {
    throw Error(ErrorCode::SingularArgument, "measured Renyi needs full-rank arguments after regularization");
  }
  const auto d = static_cast<Eigen::Index>(rho_in.dim());
  const MeasuredObjective f(alpha, rho, sigma);

  // Seeds: I, the commuting-case optimum (alpha - 1)(ln rho - ln sigma), caller guesses.
  std::vector<DenseMatrix> starts;
  starts.push_back(DenseMatrix::Zero(d, d));
  starts.push_back((alpha - 1.0) * (apply_function(er, ScalarFunction::log()) - apply_function(es, ScalarFunction::log())));
  for (const auto& w : cfg.seeds) {
    require_same_dim(rho, w, "measured_renyi seed");
    const auto ew = jacobi_eigensystem(w);
    if (positive_definite(ew) && ew.values(0) > 0.0) starts.push_back(apply_function(ew, ScalarFunction::log()));
  }
  RealVector x;
  double fx = std::numeric_limits<double>::infinity();
  for (const auto& h : starts) {
    const double v = f(h);
    if (v < fx) {
      fx = v;
      x = coords_from_hermitian(h);
    }
  }

  const Eigen::Index n = x.size();
  auto eval = [&](const RealVector& y) { return f(hermitian_from_coords(y, d)); };
  auto gradient = [&](const RealVector& y) {
    RealVector g(n);
    RealVector probe = y;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double h = cfg.fd_step * std::max(1.0, std::abs(y(k)));
      probe(k) = y(k) + h;
      const double up = eval(probe);
      probe(k) = y(k) - h;
      const double down = eval(probe);
      probe(k) = y(k);
      g(k) = (up - down) / (2.0 * h);
    }
    // the objective is invariant under H -> H + cI
    const double mean = g.head(d).mean();
    g.head(d).array() -= mean;
    return g;
  };

  MeasuredRenyiResult result;
  Eigen::MatrixXd inv_hess = Eigen::MatrixXd::Identity(n, n);
  RealVector g = gradient(x);
  int stalls = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    result.iterations = it + 1;
    if (g.norm() < 1e-12) {
      result.converged = true;
      break;
    }
    RealVector dir = -inv_hess * g;
    if (dir.dot(g) >= 0.0) {
      inv_hess.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    RealVector x_new;
    double f_new = fx;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      x_new = x + step * dir;
      f_new = eval(x_new);
      if (f_new <= fx + 1e-4 * step * dir.dot(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (inv_hess.isIdentity()) {
        // no descent along the gradient at working precision
        result.converged = true;
        break;
      }
      inv_hess.setIdentity();
      continue;
    }
    x_new.head(d).array() -= x_new.head(d).mean();
    const RealVector g_new = gradient(x_new);
    const RealVector s = x_new - x;
    const RealVector yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-16) {
      const double rho_k = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      inv_hess = (id - rho_k * s * yv.transpose()) * inv_hess * (id - rho_k * yv * s.transpose()) +
                 rho_k * s * s.transpose();
    }
    const double change = fx - f_new;
    x = x_new;
    fx = f_new;
    g = g_new;
    stalls = change < cfg.tol ? stalls + 1 : 0;
    if (stalls >= 2) {
      result.converged = true;
      break;
    }
  }

  const DenseMatrix h = hermitian_from_coords(x, d);
  const auto eh = jacobi_eigensystem(h);
  RealVector w = (eh.values.array() - eh.values.maxCoeff()).exp().matrix();
  w /= w.sum();
  result.omega = spectral_map(eh, w);
  result.value = f.to_divergence(fx);
  return result;
}

double weighted_lp_norm(const DenseMatrix& x_in, double p, const DenseMatrix& sigma, double regularization) {
  if (p == 0.0 || !std::isfinite(p)) throw Error(ErrorCode::BadParameter, "weighted norm needs a finite p != 0");
  require_same_dim(x_in, sigma, "weighted_lp_norm");
  const auto es = jacobi_eigensystem(sigma);
  if (!positive_definite(es) || es.values(0) <= 0.0) {
    throw Error(ErrorCode::SingularArgument, "weight must be positive definite");
  }
  if (p < 0.0) {
    const DenseMatrix x = regularization > 0.0 ? regularize(x_in, regularization) : x_in;
    const auto ex = jacobi_eigensystem(x);
    if (!positive_definite(ex) || ex.values(0) <= 0.0) {
      throw Error(ErrorCode::SingularArgument, "negative-order norm needs a positive-definite argument");
    }
    const DenseMatrix inv = apply_function(ex, ScalarFunction::pow(-1.0));
    return 1.0 / weighted_lp_norm(inv, -p, sigma, 0.0);
  }
  const DenseMatrix s = apply_function(es, ScalarFunction::pow(1.0 / (2.0 * p)));
  const DenseMatrix y = s * x_in * s;
  const auto ey = jacobi_eigensystem(0.5 * (y + y.adjoint()));
  double tr = 0.0;
  for (Eigen::Index i = 0; i < ey.values.size(); ++i) tr += std::pow(std::abs(ey.values(i)), p);
  return std::pow(tr, 1.0 / p);
}

double weighted_lp_norm(const ComplexMatrix& x, double p, const DensityMatrix& sigma, double regularization) {
  if (!x.is_hermitian(1e-10)) throw Error(ErrorCode::NotHermitian, "weighted norm argument must be Hermitian");
  return weighted_lp_norm(x.mat(), p, sigma.dense(), regularization);
}

}  // namespace qcap
