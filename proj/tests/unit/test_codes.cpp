#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qcap/codes.hpp"
#include "qcap/random.hpp"

using namespace qcap;

namespace {

DenseVector ket(double c0, Complex c1) {
  DenseVector v(2);
  v << c0, c1;
  return v;
}

Povm basis_measurement(std::size_t d) {
  std::vector<ComplexMatrix> e;
  for (std::size_t i = 0; i < d; ++i) e.push_back(DensityMatrix::basis_state(d, i).matrix());
  return Povm(std::move(e));
}

double povm_sum_defect(const Povm& p) {
  DenseMatrix s = DenseMatrix::Zero(static_cast<Eigen::Index>(p.dim()), static_cast<Eigen::Index>(p.dim()));
  for (const auto& e : p.elements()) s += e.mat();
  return (s - DenseMatrix::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
}

// Helstrom error for equal priors: (1 - ||rho1 - rho2||_1 / 2) / 2, trace norm
// from Eigen's eigenvalues of the difference.
double helstrom_error(const DenseMatrix& a, const DenseMatrix& b) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a - b);
  return 0.5 * (1.0 - 0.5 * es.eigenvalues().cwiseAbs().sum());
}

}  // namespace

TEST_CASE("code construction") {
  const auto z0 = DensityMatrix::basis_state(2, 0);
  const auto z1 = DensityMatrix::basis_state(2, 1);
  const auto code = ClassicalQuantumCode::block({{z0}, {z1}}, basis_measurement(2));
  CHECK(code.num_messages() == 2);
  CHECK(code.blocklength() == 1);
  CHECK(code.is_block());
  CHECK(code.input_dim() == 2);

  CHECK_THROWS_AS(ClassicalQuantumCode::block({}, basis_measurement(2)), Error);
  CHECK_THROWS_AS(ClassicalQuantumCode::block({{z0}, {z0, z1}}, basis_measurement(2)), Error);
  try {
    ClassicalQuantumCode::block({{z0}, {z1}, {z0}}, basis_measurement(2));
    FAIL("decoder too small");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }

  Ensemble mix{{0.5, 0.5}, {z0, z1}};
  Ensemble pure{{1.0}, {z0}};
  std::vector<Ensemble> enc{mix, pure};
  const auto sto = ClassicalQuantumCode::stochastic(1, enc, basis_measurement(2));
  CHECK(sto.kind() == EncoderKind::StochasticAveraged);
  CHECK(max_abs_diff(sto.codeword(0).matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
  try {
    sto.block_codewords();
    FAIL("not a block code");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotBlockCode);
  }
  CHECK(encoder_kind_from_string("deterministic-general") == EncoderKind::DeterministicGeneral);
  CHECK_THROWS_AS(encoder_kind_from_string("entangled"), Error);
}

TEST_CASE("random codebook") {
  const auto ch = depolarizing(2, 0.2);
  const auto z0 = DensityMatrix::basis_state(2, 0);
  const auto z1 = DensityMatrix::basis_state(2, 1);

  SUBCASE("single message decodes perfectly with the trivial decoder") {
    const auto book = random_codebook(ch, Ensemble{{0.5, 0.5}, {z0, z1}}, 3, 1, 4);
    REQUIRE(book.size() == 1);
    const Povm trivial(std::vector<ComplexMatrix>{ComplexMatrix::identity(8)});
    const auto perf = evaluate_code(ClassicalQuantumCode::block(book, trivial), ch);
    CHECK(perf.max_error == 0.0);
  }
  SUBCASE("degenerate ensemble gives identical codewords") {
    const auto book = random_codebook(ch, Ensemble{{1.0}, {z1}}, 4, 6, 9);
    for (const auto& cw : book) {
      for (const auto& s : cw) CHECK(max_abs_diff(s.matrix(), z1.matrix()) == 0.0);
    }
  }
  SUBCASE("symbol frequencies") {
    const Ensemble e{{0.2, 0.5, 0.3}, {z0, z1, DensityMatrix::maximally_mixed(2)}};
    const auto book = random_codebook(ch, e, 1, 10000, 21);
    std::vector<double> count(3, 0.0);
    for (const auto& cw : book) {
      for (std::size_t k = 0; k < 3; ++k) {
        if (max_abs_diff(cw[0].matrix(), e.states[k].matrix()) == 0.0) count[k] += 1;
      }
    }
    for (std::size_t k = 0; k < 3; ++k) {
      const double sigma = std::sqrt(10000 * e.probs[k] * (1 - e.probs[k]));
      CHECK(std::abs(count[k] - 10000 * e.probs[k]) <= 3 * sigma);
    }
  }
  SUBCASE("seeded") {
    const Ensemble e{{0.5, 0.5}, {z0, z1}};
    const auto a = random_codebook(ch, e, 5, 7, 33);
    const auto b = random_codebook(ch, e, 5, 7, 33);
    for (std::size_t m = 0; m < 7; ++m) {
      for (std::size_t i = 0; i < 5; ++i) CHECK(max_abs_diff(a[m][i].matrix(), b[m][i].matrix()) == 0.0);
    }
    try {
      random_codebook(ch, e, 13, 2, 1);
      FAIL("cap");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::DimensionOverflow);
    }
  }
}

TEST_CASE("pretty good measurement") {
  const std::vector<double> uniform{0.5, 0.5};
  SUBCASE("orthogonal pure states") {
    std::vector<DensityMatrix> outs{DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1)};
    const Povm p = pgm_decoder(outs, uniform);
    CHECK(max_abs_diff(p[0], outs[0].matrix()) < 1e-12);
    CHECK(max_abs_diff(p[1], outs[1].matrix()) < 1e-12);
    std::vector<DenseMatrix> dense{outs[0].dense(), outs[1].dense()};
    CHECK(decoding_performance(dense, p).max_error < 1e-12);
  }
  SUBCASE("identical states") {
    const auto psi = DensityMatrix::pure(ket(0.6, Complex(0.0, 0.8)));
    std::vector<DensityMatrix> outs{psi, psi};
    const Povm p = pgm_decoder(outs, uniform);
    CHECK(max_abs_diff(p[0], 0.5 * psi.matrix()) < 1e-12);
    CHECK(max_abs_diff(p[1], 0.5 * psi.matrix()) < 1e-12);
    std::vector<DenseMatrix> dense{psi.dense(), psi.dense()};
    CHECK(std::abs(decoding_performance(dense, p).avg_error - 0.5) < 1e-12);
  }
  SUBCASE("single message") {
    Rng rng(2);
    const DensityMatrix rho(random_density(3, rng, 2));
    std::vector<DensityMatrix> outs{rho};
    const std::vector<double> one{1.0};
    const Povm p = pgm_decoder(outs, one);
    REQUIRE(p.size() == 2);
    // projector onto supp(rho): idempotent, rank 2
    const DenseMatrix e = p[0].mat();
    CHECK((e * e - e).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(e.trace().real() - 2.0) < 1e-10);
    CHECK(std::abs(p[1].mat().trace().real() - 1.0) < 1e-10);
  }
  SUBCASE("random ensembles sum to identity") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t d = 2 + static_cast<std::size_t>(trial % 3);
      const std::size_t M = 1 + static_cast<std::size_t>(trial % 5);
      std::vector<DenseMatrix> outs;
      std::vector<double> pri;
      for (std::size_t m = 0; m < M; ++m) {
        outs.push_back(random_density(d, rng, 1 + static_cast<std::size_t>(trial % d)));
        pri.push_back(1.0 + static_cast<double>(m));
      }
      const double tot = std::accumulate(pri.begin(), pri.end(), 0.0);
      for (double& v : pri) v /= tot;
      const Povm p = pgm_decoder(std::span<const DenseMatrix>(outs), pri);
      CHECK(povm_sum_defect(p) <= 1e-9);
      for (double err : decoding_performance(outs, p).per_message) {
        CHECK(err >= 0.0);
        CHECK(err <= 1.0);
      }
    }
  }
  SUBCASE("Helstrom coincidence for two pure states") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      const DenseVector a = random_pure_state(2, rng);
      const DenseVector b = random_pure_state(2, rng);
      const double c = std::abs(a.dot(b));
      std::vector<DenseMatrix> outs{a * a.adjoint(), b * b.adjoint()};
      const Povm p = pgm_decoder(std::span<const DenseMatrix>(outs), uniform);
      const double err = decoding_performance(outs, p).avg_error;
      CHECK(std::abs(err - (1 - std::sqrt(1 - c * c)) / 2) <= 1e-8);
      CHECK(std::abs(err - helstrom_error(outs[0], outs[1])) <= 1e-8);
    }
  }
}

TEST_CASE("code evaluation") {
  const auto z0 = DensityMatrix::basis_state(2, 0);
  const auto z1 = DensityMatrix::basis_state(2, 1);
  SUBCASE("noiseless basis code") {
    const auto code = ClassicalQuantumCode::block({{z0}, {z1}}, basis_measurement(2));
    const auto perf = evaluate_code(code, identity_channel(2));
    CHECK(perf.max_error == 0.0);
    CHECK(perf.avg_error == 0.0);
  }
  SUBCASE("constant channel") {
    const std::vector<double> diag{0.5, 0.5};
    const DensityMatrix sigma(ComplexMatrix::diagonal(diag));
    const auto e = DensityMatrix::pure(ket(1 / std::sqrt(2.0), 1 / std::sqrt(2.0))).matrix();
    const Povm dec(std::vector<ComplexMatrix>{e, ComplexMatrix::identity(2) - e});
    const auto perf = evaluate_code(ClassicalQuantumCode::block({{z0}, {z1}}, dec), constant_channel(sigma, 2));
    CHECK(std::abs(perf.avg_error - 0.5) < 1e-12);
  }
  SUBCASE("depolarizing basis code") {
    for (double p : {0.0, 0.1, 0.4, 1.0}) {
      const auto perf = evaluate_code(ClassicalQuantumCode::block({{z0}, {z1}}, basis_measurement(2)), depolarizing(2, p));
      for (double err : perf.per_message) CHECK(std::abs(err - p / 2) < 1e-12);
    }
  }
  SUBCASE("relabelling messages and decoder elements together") {
    const auto ch = depolarizing(2, 0.25);
    for (int trial = 0; trial < 20; ++trial) {
      const auto code = random_pgm_code(ch, Ensemble{{0.5, 0.5}, {z0, z1}}, 2, 3, static_cast<std::uint64_t>(trial));
      const std::vector<std::size_t> perm{2, 0, 1};
      std::vector<BlockCodeword> moved(3);
      std::vector<ComplexMatrix> elems(4, ComplexMatrix::zero(4));
      for (std::size_t m = 0; m < 3; ++m) {
        moved[perm[m]] = code.block_codewords()[m];
        elems[perm[m]] = code.decoder()[m];
      }
      elems[3] = code.decoder()[3];
      const auto a = evaluate_code(code, ch);
      const auto b = evaluate_code(ClassicalQuantumCode::block(moved, Povm(elems)), ch);
      CHECK(std::abs(a.max_error - b.max_error) < 1e-14);
      CHECK(std::abs(a.avg_error - b.avg_error) < 1e-14);
      for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(a.per_message[m] - b.per_message[perm[m]]) < 1e-14);
    }
  }
  SUBCASE("mismatched dimensions") {
    const auto code = ClassicalQuantumCode::block({{z0, z0}, {z1, z1}}, basis_measurement(2));
    try {
      evaluate_code(code, identity_channel(2));
      FAIL("mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }
  SUBCASE("general codeword on the product space") {
    // Bell-state codewords through two uses of the identity channel
    DenseVector bell = DenseVector::Zero(4);
    bell(0) = bell(3) = 1 / std::sqrt(2.0);
    DenseVector anti = DenseVector::Zero(4);
    anti(1) = anti(2) = 1 / std::sqrt(2.0);
    std::vector<DensityMatrix> cws{DensityMatrix::pure(bell), DensityMatrix::pure(anti)};
    std::vector<ComplexMatrix> elems{cws[0].matrix(), cws[1].matrix()};
    const auto code = ClassicalQuantumCode::general(2, cws, complete_povm(elems, 4));
    CHECK(evaluate_code(code, identity_channel(2)).max_error < 1e-12);
    const auto perf = evaluate_code(code, depolarizing(2, 0.3));
    CHECK(perf.max_error > 0.0);
    CHECK(perf.avg_error <= perf.max_error + 1e-12);
  }
}

TEST_CASE("induced output state") {
  const auto z0 = DensityMatrix::basis_state(2, 0);
  const auto z1 = DensityMatrix::basis_state(2, 1);
  const auto ch = depolarizing(2, 0.3);
  const auto single = ClassicalQuantumCode::block({{z0}}, basis_measurement(2));
  CHECK(max_abs_diff(induced_output_state(single, ch).matrix(), apply_channel(ch, z0).matrix()) < 1e-15);
  const auto basis = ClassicalQuantumCode::block({{z0}, {z1}}, basis_measurement(2));
  CHECK(max_abs_diff(induced_output_state(basis, identity_channel(2)).matrix(),
                     DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);

  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<BlockCodeword> book;
    for (int m = 0; m < 3; ++m) {
      BlockCodeword cw;
      for (int i = 0; i < 3; ++i) cw.push_back(DensityMatrix(random_density(2, rng)));
      book.push_back(cw);
    }
    const Povm trivial(std::vector<ComplexMatrix>{ComplexMatrix::identity(8) * Complex(0.25),
                                                  ComplexMatrix::identity(8) * Complex(0.25),
                                                  ComplexMatrix::identity(8) * Complex(0.5)});
    const auto code = ClassicalQuantumCode::block(book, trivial);
    // direct oracle: materialise each codeword and the 3-fold channel
    const auto power = channel_tensor_power(ch, 3);
    DenseMatrix direct = DenseMatrix::Zero(8, 8);
    for (std::size_t m = 0; m < 3; ++m) direct += apply_channel(power, code.codeword(m).dense()) / 3.0;
    CHECK((induced_output_state(code, ch).dense() - direct).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("tiny code enumeration") {
  std::vector<DensityMatrix> symbols{DensityMatrix::basis_state(2, 0),
                                     DensityMatrix::pure(ket(0.5, std::sqrt(0.75)))};
  std::size_t seen = 0;
  auto count = [&](const ClassicalQuantumCode&) { ++seen; };
  CHECK(enumerate_tiny_codes(symbols, 1, 2, DecoderFamily::Pgm, count) == 4);
  CHECK(enumerate_tiny_codes(symbols, 2, 2, DecoderFamily::Pgm, count) == 16);
  CHECK(seen == 20);
  // projective: 4 codebooks x 2^2 basis assignments
  CHECK(enumerate_tiny_codes(symbols, 1, 2, DecoderFamily::ProjectiveFromBasis, count) == 16);

  const auto ch = depolarizing(2, 0.1);
  for (auto family : {DecoderFamily::Pgm, DecoderFamily::ProjectiveFromBasis}) {
    enumerate_tiny_codes(symbols, 2, 2, family, [&](const ClassicalQuantumCode& code) {
      CHECK(code.is_block());
      CHECK(code.num_messages() == 2);
      CHECK(povm_sum_defect(code.decoder()) <= 1e-9);
      const auto perf = evaluate_code(code, ch);
      CHECK(perf.avg_error <= perf.max_error + 1e-12);
      for (double e : perf.per_message) {
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
      }
    }, &ch);
  }
  try {
    enumerate_tiny_codes(symbols, 5, 4, DecoderFamily::Pgm, count);
    FAIL("cap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EnumerationTooLarge);
  }
  std::size_t visits = 0;
  CHECK(enumerate_symbol_assignments(3, 2, 2, [&](std::span<const std::size_t> idx) {
          CHECK(idx.size() == 4);
          ++visits;
        }) == 81);
  CHECK(visits == 81);
}
