#include <doctest.h>

#include <cmath>

#include "qcap/random.hpp"
#include "qcap/states.hpp"

using namespace qcap;

namespace {

DenseMatrix ket_bra(std::size_t d, std::size_t i, std::size_t j) {
  DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InternalInconsistency;
}

// Random CPTP map via a Haar isometry V: C^din -> C^dout (x) C^r, K_j = (I (x) <j|) V.
QuantumChannel random_channel(std::size_t din, std::size_t dout, std::size_t r, Rng& rng) {
  r = std::max(r, (din + dout - 1) / dout);
  const DenseMatrix u = random_unitary(dout * r, rng);
  const DenseMatrix v = u.leftCols(static_cast<Eigen::Index>(din));
  std::vector<DenseMatrix> kraus;
  for (std::size_t j = 0; j < r; ++j) {
    DenseMatrix k(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(din));
    for (std::size_t a = 0; a < dout; ++a) k.row(static_cast<Eigen::Index>(a)) = v.row(static_cast<Eigen::Index>(a * r + j));
    kraus.push_back(k);
  }
  return validate_channel(kraus);
}

}  // namespace

TEST_CASE("DensityMatrix invariants") {
  CHECK_NOTHROW(DensityMatrix::maximally_mixed(3));
  CHECK(code_of([] { DensityMatrix(DenseMatrix(DenseMatrix::Identity(2, 2))); }) == ErrorCode::NotDensityMatrix);
  DenseMatrix neg = DenseMatrix::Zero(2, 2);
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  CHECK(code_of([&] { DensityMatrix m(neg); }) == ErrorCode::NotDensityMatrix);
  DenseMatrix slight = DenseMatrix::Zero(2, 2);
  slight(0, 0) = 1.0 + 5e-11;
  slight(1, 1) = -5e-11;
  CHECK_NOTHROW(DensityMatrix{slight});
  DenseMatrix nh = DenseMatrix::Identity(2, 2) * 0.5;
  nh(0, 1) = 0.1;
  CHECK(code_of([&] { DensityMatrix m(nh); }) == ErrorCode::NotDensityMatrix);
}

TEST_CASE("validate_channel spec cases") {
  CHECK_NOTHROW(validate_channel({DenseMatrix::Identity(2, 2)}));
  const auto damp = validate_channel({ket_bra(2, 0, 0), ket_bra(2, 0, 1)});
  const auto out = apply_channel(damp, DensityMatrix::maximally_mixed(2));
  CHECK(std::abs(out.dense()(0, 0) - 1.0) < 1e-15);
  CHECK(code_of([] { validate_channel({2.0 * DenseMatrix::Identity(2, 2)}); }) == ErrorCode::NotTracePreserving);
}

TEST_CASE("channel_from_choi detects non-CP maps") {
  // transpose map: Choi = swap, eigenvalue -1
  DenseMatrix swap = DenseMatrix::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = 1.0;
  swap(1, 2) = swap(2, 1) = 1.0;
  CHECK(code_of([&] { channel_from_choi(ComplexMatrix(swap), 2, 2); }) == ErrorCode::NotCompletelyPositive);

  Rng rng(4);
  const auto ch = random_channel(2, 3, 2, rng);
  const auto rebuilt = channel_from_choi(ch.base_choi(), 2, 3);
  const DensityMatrix rho(random_density(2, rng));
  CHECK((apply_channel(ch, rho).dense() - apply_channel(rebuilt, rho).dense()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Choi CP check agrees with maximally entangled probe") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ch = random_channel(2, 2, 2, rng);
    ComplexMatrix choi = ch.base_choi();
    if (trial % 2 == 1) {
      // corrupt with a Hermitian perturbation of random size
      const DenseMatrix h = random_hermitian(4, rng);
      choi = ComplexMatrix(choi.mat() + 0.3 * h);
    }
    // probe: (id (x) N)(|Omega><Omega|) = Choi, so PSD of the output is the same spectral question
    // answered independently by Eigen's solver.
    Eigen::SelfAdjointEigenSolver<DenseMatrix> probe(choi.mat());
    const bool probe_psd = probe.eigenvalues().minCoeff() >= -kChannelTol;
    bool accepted = true;
    try {
      channel_from_choi(choi, 2, 2);
    } catch (const Error& e) {
      accepted = e.code() != ErrorCode::NotCompletelyPositive;
    }
    CHECK(accepted == probe_psd);
  }
}

TEST_CASE("apply_channel examples") {
  Rng rng(23);
  const DensityMatrix rho(random_density(2, rng));
  CHECK((apply_channel(identity_channel(2), rho).dense() - rho.dense()).cwiseAbs().maxCoeff() < 1e-15);
  const auto full = apply_channel(depolarizing(2, 1.0), rho);
  CHECK((full.dense() - 0.5 * DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  for (double p : {0.0, 0.1, 0.37, 0.9}) {
    const auto out = apply_channel(depolarizing(2, p), DensityMatrix::basis_state(2, 0));
    CHECK(std::abs(out.dense()(0, 0).real() - (1 - p / 2)) < 1e-14);
    CHECK(std::abs(out.dense()(1, 1).real() - p / 2) < 1e-14);
  }
  CHECK(code_of([&] { apply_channel(identity_channel(3), rho); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("apply_channel preserves trace and positivity") {
  Rng rng(29);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t din = 1 + static_cast<std::size_t>(trial % 8);
    const std::size_t dout = 1 + static_cast<std::size_t>((trial / 8) % 8);
    const auto ch = random_channel(din, dout, 1 + static_cast<std::size_t>(trial % 3), rng);
    const DensityMatrix rho(random_density(din, rng, 1 + static_cast<std::size_t>(trial) % din));
    const DenseMatrix out = apply_channel(ch, rho.dense());
    REQUIRE(std::abs(out.trace() - Complex(1.0)) < 1e-12);
    REQUIRE(Eigen::SelfAdjointEigenSolver<DenseMatrix>(0.5 * (out + out.adjoint())).eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("depolarizing is unital and p=0 is identity") {
  for (std::size_t d : {2u, 3u, 4u}) {
    const auto ch = depolarizing(d, 0.42);
    const auto out = apply_channel(ch, DensityMatrix::maximally_mixed(d));
    CHECK((out.dense() - DensityMatrix::maximally_mixed(d).dense()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const auto id = depolarizing(2, 0.0);
  CHECK(id.base_kraus().size() == 1);
  CHECK(code_of([] { depolarizing(2, 1.5); }) == ErrorCode::BadParameter);
}

TEST_CASE("channel_tensor_power") {
  Rng rng(31);
  const auto ch = random_channel(2, 2, 2, rng);
  const auto one = channel_tensor_power(ch, 1);
  const DensityMatrix rho(random_density(2, rng));
  CHECK((apply_channel(one, rho).dense() - apply_channel(ch, rho).dense()).cwiseAbs().maxCoeff() == 0.0);

  const auto id3 = channel_tensor_power(identity_channel(2), 3);
  CHECK(id3.dim_in() == 8);
  const DensityMatrix r8(random_density(8, rng));
  CHECK((apply_channel(id3, r8).dense() - r8.dense()).cwiseAbs().maxCoeff() < 1e-14);

  for (int trial = 0; trial < 50; ++trial) {
    const auto n = random_channel(2, 3, 2, rng);
    const auto nn = channel_tensor_power(n, 2);
    const DensityMatrix a(random_density(2, rng));
    const DensityMatrix b(random_density(2, rng));
    const DensityMatrix ab(tensor_product(a.matrix(), b.matrix()));
    const ComplexMatrix expected = tensor_product(apply_channel(n, a).matrix(), apply_channel(n, b).matrix());
    CHECK((apply_channel(nn, ab.dense()) - expected.mat()).cwiseAbs().maxCoeff() < 1e-13);
    // materialised Kraus products agree with the slot-wise action
    const auto kr = nn.kraus();
    DenseMatrix direct = DenseMatrix::Zero(9, 9);
    for (const auto& k : kr) direct += k * ab.dense() * k.adjoint();
    CHECK((direct - expected.mat()).cwiseAbs().maxCoeff() < 1e-13);
    // adjoint consistency: Tr(Y N(X)) = Tr(N^dagger(Y) X)
    const DenseMatrix y = random_hermitian(9, rng);
    const Complex lhs = (y * apply_channel(nn, ab.dense())).trace();
    const Complex rhs = (apply_adjoint(nn, y) * ab.dense()).trace();
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }

  CHECK(code_of([] { channel_tensor_power(identity_channel(2), 13); }) == ErrorCode::DimensionOverflow);
}

TEST_CASE("standard families") {
  Rng rng(37);
  const DensityMatrix sigma(random_density(3, rng));
  const auto c = constant_channel(sigma, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho(random_density(2, rng));
    CHECK((apply_channel(c, rho).dense() - sigma.dense()).cwiseAbs().maxCoeff() < 1e-12);
  }

  const Povm basis({ComplexMatrix(ket_bra(2, 0, 0)), ComplexMatrix(ket_bra(2, 1, 1))});
  const std::vector<DensityMatrix> preps{DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1)};
  const auto dephase = entanglement_breaking(basis, preps);
  const DensityMatrix rho(random_density(2, rng));
  const DenseMatrix out = apply_channel(dephase, rho.dense());
  CHECK(std::abs(out(0, 1)) < 1e-15);
  CHECK(std::abs(out(0, 0) - rho.dense()(0, 0)) < 1e-14);

  const std::vector<DensityMatrix> signals{DensityMatrix::basis_state(2, 0), DensityMatrix::maximally_mixed(2)};
  const auto cq = cq_channel(signals);
  CHECK((apply_channel(cq, DensityMatrix::basis_state(2, 1)).dense() - signals[1].dense()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Povm and complete_povm") {
  const auto id = ComplexMatrix::identity(2);
  const std::vector<ComplexMatrix> full{id};
  const auto p1 = complete_povm(full, 2);
  CHECK(p1.size() == 2);
  CHECK(p1[1].mat().cwiseAbs().maxCoeff() < 1e-15);

  const auto p0 = complete_povm({}, 2);
  CHECK(p0.size() == 1);
  CHECK(max_abs_diff(p0[0], id) == 0.0);

  const std::vector<ComplexMatrix> proj{ComplexMatrix(ket_bra(2, 0, 0))};
  const auto p2 = complete_povm(proj, 2);
  CHECK(max_abs_diff(p2[1], ComplexMatrix(ket_bra(2, 1, 1))) < 1e-15);

  const std::vector<ComplexMatrix> over{id, ComplexMatrix(ket_bra(2, 0, 0))};
  CHECK(code_of([&] { complete_povm(over, 2); }) == ErrorCode::ElementsExceedIdentity);
  CHECK(code_of([&] { Povm p({ComplexMatrix(ket_bra(2, 0, 0))}); }) == ErrorCode::InvalidPovm);
}

TEST_CASE("Ensemble validation") {
  Ensemble e{{0.5, 0.5}, {DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1)}};
  CHECK_NOTHROW(e.validate());
  const auto avg = ensemble_average(e.probs, e.states);
  CHECK((avg.dense() - 0.5 * DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  Ensemble bad{{0.6, 0.5}, e.states};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::BadParameter);
}
