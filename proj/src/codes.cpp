#include "qcap/codes.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace qcap {

namespace {

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

// Re Tr(a b) for Hermitian a, b.
double trace_product(const DenseMatrix& a, const DenseMatrix& b) {
  return (a.array() * b.transpose().array()).sum().real();
}

std::size_t power_dim(std::size_t d, std::size_t n) {
  std::vector<std::size_t> dims(n, d);
  return checked_product(dims, kDefaultDimensionCap);
}

}  // namespace

std::string_view to_string(EncoderKind kind) noexcept {
  switch (kind) {
    case EncoderKind::DeterministicBlock: return "deterministic-block";
    case EncoderKind::DeterministicGeneral: return "deterministic-general";
    case EncoderKind::StochasticAveraged: return "stochastic-averaged";
  }
  return "?";
}

EncoderKind encoder_kind_from_string(std::string_view name) {
  for (auto k : {EncoderKind::DeterministicBlock, EncoderKind::DeterministicGeneral, EncoderKind::StochasticAveraged}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown encoder kind '" + std::string(name) + "'");
}

ClassicalQuantumCode::ClassicalQuantumCode(std::size_t n, EncoderKind kind, std::vector<BlockCodeword> slots,
                                           std::vector<DensityMatrix> joint, Povm decoder)
    : blocklength_(n), kind_(kind), slots_(std::move(slots)), joint_(std::move(joint)), decoder_(std::move(decoder)) {
  if (num_messages() == 0) throw Error(ErrorCode::BadParameter, "a code needs at least one message");
  if (decoder_.size() < num_messages()) {
    throw Error(ErrorCode::DimensionMismatch, "decoder has " + std::to_string(decoder_.size()) + " elements for " +
                                                  std::to_string(num_messages()) + " messages");
  }
}

ClassicalQuantumCode ClassicalQuantumCode::block(std::vector<BlockCodeword> codewords, Povm decoder) {
  if (codewords.empty() || codewords.front().empty()) throw Error(ErrorCode::BadParameter, "empty codebook");
  const std::size_t n = codewords.front().size();
  const std::size_t d = codewords.front().front().dim();
  for (const auto& cw : codewords) {
    if (cw.size() != n) throw Error(ErrorCode::BadParameter, "codewords have different blocklengths");
    for (const auto& s : cw) {
      if (s.dim() != d) throw Error(ErrorCode::BadParameter, "codeword slots have different dimensions");
    }
  }
  return ClassicalQuantumCode(n, EncoderKind::DeterministicBlock, std::move(codewords), {}, std::move(decoder));
}

ClassicalQuantumCode ClassicalQuantumCode::general(std::size_t blocklength, std::vector<DensityMatrix> codewords,
                                                   Povm decoder, EncoderKind kind) {
  if (blocklength == 0) throw Error(ErrorCode::BadParameter, "blocklength must be positive");
  if (codewords.empty()) throw Error(ErrorCode::BadParameter, "empty codebook");
  if (kind == EncoderKind::DeterministicBlock) {
    throw Error(ErrorCode::BadParameter, "block codes are built with ClassicalQuantumCode::block");
  }
  for (const auto& c : codewords) {
    if (c.dim() != codewords.front().dim()) throw Error(ErrorCode::BadParameter, "codeword dimensions differ");
  }
  return ClassicalQuantumCode(blocklength, kind, {}, std::move(codewords), std::move(decoder));
}

ClassicalQuantumCode ClassicalQuantumCode::stochastic(std::size_t blocklength, std::span<const Ensemble> encoders,
                                                      Povm decoder) {
  std::vector<DensityMatrix> averaged;
  averaged.reserve(encoders.size());
  for (const auto& e : encoders) {
    e.validate();
    averaged.push_back(ensemble_average(e.probs, e.states));
  }
  return general(blocklength, std::move(averaged), std::move(decoder), EncoderKind::StochasticAveraged);
}

std::size_t ClassicalQuantumCode::input_dim() const {
  if (!joint_.empty()) return joint_.front().dim();
  std::vector<std::size_t> dims;
  for (const auto& s : slots_.front()) dims.push_back(s.dim());
  return checked_product(dims, kDefaultDimensionCap);
}

const std::vector<BlockCodeword>& ClassicalQuantumCode::block_codewords() const {
  if (!is_block()) throw Error(ErrorCode::NotBlockCode, std::string("code is ") + std::string(to_string(kind_)));
  return slots_;
}

DensityMatrix ClassicalQuantumCode::codeword(std::size_t m) const {
  if (m >= num_messages()) throw Error(ErrorCode::BadParameter, "message index out of range");
  if (!joint_.empty()) return joint_[m];
  return tensor_product(slots_[m]);
}

ClassicalQuantumCode ClassicalQuantumCode::with_decoder(Povm decoder) const {
  return ClassicalQuantumCode(blocklength_, kind_, slots_, joint_, std::move(decoder));
}

std::vector<DenseMatrix> codeword_outputs(const ClassicalQuantumCode& code, const QuantumChannel& n) {
  const std::size_t out_dim = power_dim(n.dim_out(), code.blocklength());
  if (code.decoder().dim() != out_dim) {
    throw Error(ErrorCode::DimensionMismatch, "decoder acts on dimension " + std::to_string(code.decoder().dim()) +
                                                  ", channel outputs have " + std::to_string(out_dim));
  }
  std::vector<DenseMatrix> outs;
  outs.reserve(code.num_messages());
  if (code.is_block()) {
    for (const auto& cw : code.block_codewords()) {
      DenseMatrix acc = DenseMatrix::Ones(1, 1);
      for (const auto& s : cw) {
        if (s.dim() != n.dim_in()) throw Error(ErrorCode::DimensionMismatch, "slot dimension differs from channel input");
        acc = kron(acc, apply_channel(n, s.dense()));
      }
      outs.push_back(0.5 * (acc + acc.adjoint()));
    }
    return outs;
  }
  if (code.input_dim() != power_dim(n.dim_in(), code.blocklength())) {
    throw Error(ErrorCode::DimensionMismatch, "codeword dimension differs from channel input power");
  }
  const QuantumChannel power = channel_tensor_power(n, code.blocklength());
  for (std::size_t m = 0; m < code.num_messages(); ++m) {
    DenseMatrix o = apply_channel(power, code.codeword(m).dense());
    outs.push_back(0.5 * (o + o.adjoint()));
  }
  return outs;
}

CodePerformance decoding_performance(std::span<const DenseMatrix> outputs, const Povm& decoder) {
  if (decoder.size() < outputs.size()) throw Error(ErrorCode::DimensionMismatch, "decoder has too few elements");
  CodePerformance perf;
  perf.per_message.reserve(outputs.size());
  for (std::size_t m = 0; m < outputs.size(); ++m) {
    if (static_cast<std::size_t>(outputs[m].rows()) != decoder.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "output and decoder dimensions differ");
    }
    const double err = std::clamp(1.0 - trace_product(outputs[m], decoder[m].mat()), 0.0, 1.0);
    perf.per_message.push_back(err);
    perf.max_error = std::max(perf.max_error, err);
    perf.avg_error += err;
  }
  perf.avg_error /= static_cast<double>(outputs.size());
  perf.avg_error = std::min(perf.avg_error, perf.max_error);
  return perf;
}

CodePerformance evaluate_code(const ClassicalQuantumCode& code, const QuantumChannel& n) {
  const auto outs = codeword_outputs(code, n);
  return decoding_performance(outs, code.decoder());
}

DensityMatrix induced_output_state(const ClassicalQuantumCode& code, const QuantumChannel& n) {
  const auto outs = codeword_outputs(code, n);
  DenseMatrix acc = DenseMatrix::Zero(outs.front().rows(), outs.front().cols());
  for (const auto& o : outs) acc += o;
  acc /= static_cast<double>(outs.size());
  return DensityMatrix(ComplexMatrix(0.5 * (acc + acc.adjoint())));
}

std::vector<BlockCodeword> random_codebook(const QuantumChannel& n, const Ensemble& e, std::size_t blocklength,
                                           std::size_t M, std::uint64_t seed) {
  if (M == 0 || blocklength == 0) throw Error(ErrorCode::BadParameter, "M and blocklength must be positive");
  e.validate();
  if (e.states.front().dim() != n.dim_in()) throw Error(ErrorCode::DimensionMismatch, "ensemble does not match channel");
  power_dim(n.dim_in(), blocklength);
  power_dim(n.dim_out(), blocklength);
  Rng rng(seed);
  std::discrete_distribution<std::size_t> pick(e.probs.begin(), e.probs.end());
  std::vector<BlockCodeword> book(M);
  for (auto& cw : book) {
    cw.reserve(blocklength);
    for (std::size_t i = 0; i < blocklength; ++i) cw.push_back(e.states[pick(rng)]);
  }
  return book;
}

Povm pgm_decoder(std::span<const DenseMatrix> outputs, std::span<const double> priors) {
  if (outputs.empty() || outputs.size() != priors.size()) {
    throw Error(ErrorCode::BadParameter, "PGM needs one prior per output state");
  }
  const auto d = outputs.front().rows();
  DenseMatrix s = DenseMatrix::Zero(d, d);
  for (std::size_t m = 0; m < outputs.size(); ++m) {
    if (outputs[m].rows() != d) throw Error(ErrorCode::DimensionMismatch, "output states differ in dimension");
    if (!(priors[m] >= 0.0)) throw Error(ErrorCode::BadParameter, "negative prior");
    s += priors[m] * outputs[m];
  }
  s = 0.5 * (s + s.adjoint());
  const DenseMatrix root = apply_function(jacobi_eigensystem(s), ScalarFunction::pow(-0.5));
  std::vector<ComplexMatrix> elements;
  elements.reserve(outputs.size());
  for (std::size_t m = 0; m < outputs.size(); ++m) {
    DenseMatrix e = root * (priors[m] * outputs[m]) * root;
    elements.emplace_back(0.5 * (e + e.adjoint()));
  }
  return complete_povm(elements, static_cast<std::size_t>(d));
}

Povm pgm_decoder(std::span<const DensityMatrix> outputs, std::span<const double> priors) {
  std::vector<DenseMatrix> dense;
  dense.reserve(outputs.size());
  for (const auto& o : outputs) dense.push_back(o.dense());
  return pgm_decoder(std::span<const DenseMatrix>(dense), priors);
}

ClassicalQuantumCode random_pgm_code(const QuantumChannel& n, const Ensemble& e, std::size_t blocklength,
                                     std::size_t M, std::uint64_t seed) {
  auto book = random_codebook(n, e, blocklength, M, seed);
  std::vector<DenseMatrix> outs;
  outs.reserve(M);
  for (const auto& cw : book) {
    DenseMatrix acc = DenseMatrix::Ones(1, 1);
    for (const auto& s : cw) acc = kron(acc, apply_channel(n, s.dense()));
    outs.push_back(0.5 * (acc + acc.adjoint()));
  }
  const std::vector<double> priors(M, 1.0 / static_cast<double>(M));
  Povm dec = pgm_decoder(std::span<const DenseMatrix>(outs), priors);
  return ClassicalQuantumCode::block(std::move(book), std::move(dec));
}

std::size_t messages_for_rate(double chi, double rate, std::size_t blocklength) {
  const double m = std::round(std::exp(rate * chi * static_cast<double>(blocklength)));
  return static_cast<std::size_t>(std::max(1.0, m));
}

std::size_t enumerate_symbol_assignments(std::size_t num_symbols, std::size_t blocklength, std::size_t M,
                                         const std::function<void(std::span<const std::size_t>)>& visit, double cap) {
  if (num_symbols == 0 || blocklength == 0 || M == 0) {
    throw Error(ErrorCode::BadParameter, "symbol set, blocklength and M must be non-empty");
  }
  const std::size_t slots = blocklength * M;
  const double total = std::pow(static_cast<double>(num_symbols), static_cast<double>(slots));
  if (total > cap) {
    throw Error(ErrorCode::EnumerationTooLarge,
                std::to_string(num_symbols) + "^" + std::to_string(slots) + " codes exceed the cap");
  }
  std::vector<std::size_t> idx(slots, 0);
  std::size_t count = 0;
  while (true) {
    visit(idx);
    ++count;
    std::size_t k = slots;
    while (k > 0 && ++idx[k - 1] == num_symbols) idx[--k] = 0;
    if (k == 0) break;
  }
  return count;
}

std::size_t enumerate_tiny_codes(std::span<const DensityMatrix> symbols, std::size_t blocklength, std::size_t M,
                                 DecoderFamily family, const std::function<void(const ClassicalQuantumCode&)>& visit,
                                 const QuantumChannel* channel, double cap) {
  if (symbols.empty()) throw Error(ErrorCode::BadParameter, "empty symbol set");
  const QuantumChannel fallback = identity_channel(symbols.front().dim());
  const QuantumChannel& ch = channel ? *channel : fallback;
  std::vector<DenseMatrix> symbol_out;
  for (const auto& s : symbols) symbol_out.push_back(apply_channel(ch, s.dense()));
  const std::size_t out_dim = power_dim(ch.dim_out(), blocklength);
  const std::vector<double> priors(M, 1.0 / static_cast<double>(M));

  std::size_t yielded = 0;
  enumerate_symbol_assignments(symbols.size(), blocklength, M, [&](std::span<const std::size_t> idx) {
    std::vector<BlockCodeword> book(M);
    std::vector<DenseMatrix> outs(M);
    for (std::size_t m = 0; m < M; ++m) {
      DenseMatrix acc = DenseMatrix::Ones(1, 1);
      for (std::size_t i = 0; i < blocklength; ++i) {
        const std::size_t s = idx[m * blocklength + i];
        book[m].push_back(symbols[s]);
        acc = kron(acc, symbol_out[s]);
      }
      outs[m] = std::move(acc);
    }
    if (family == DecoderFamily::Pgm) {
      visit(ClassicalQuantumCode::block(std::move(book), pgm_decoder(std::span<const DenseMatrix>(outs), priors)));
      ++yielded;
      return;
    }
    // every map from basis vectors to messages
    std::vector<std::size_t> owner(out_dim, 0);
    while (true) {
      std::vector<DenseMatrix> elems(M, DenseMatrix::Zero(static_cast<Eigen::Index>(out_dim),
                                                          static_cast<Eigen::Index>(out_dim)));
      for (std::size_t b = 0; b < out_dim; ++b) {
        const auto bi = static_cast<Eigen::Index>(b);
        elems[owner[b]](bi, bi) = 1.0;
      }
      std::vector<ComplexMatrix> povm;
      for (auto& e : elems) povm.emplace_back(std::move(e));
      visit(ClassicalQuantumCode::block(book, Povm(std::move(povm))));
      ++yielded;
      std::size_t k = out_dim;
      while (k > 0 && ++owner[k - 1] == M) owner[--k] = 0;
      if (k == 0) break;
    }
  }, cap);
  return yielded;
}

}  // namespace qcap
