#include "qcap/random.hpp"

#include <cmath>

namespace qcap {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

DenseMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

}  // namespace

DenseVector random_pure_state(std::size_t dim, Rng& rng) {
  DenseVector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

DenseMatrix random_unitary(std::size_t dim, Rng& rng) {
  const DenseMatrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  DenseMatrix q = qr.householderQ();
  const DenseMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(k) *= d / mag;
  }
  return q;
}

DenseMatrix random_density(std::size_t dim, Rng& rng, std::size_t rank) {
  const DenseMatrix g = ginibre(dim, rank == 0 ? dim : rank, rng);
  DenseMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

DenseMatrix random_hermitian(std::size_t dim, Rng& rng) {
  const DenseMatrix g = ginibre(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

}  // namespace qcap
