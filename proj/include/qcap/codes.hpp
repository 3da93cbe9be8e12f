#pragma once

// Classical codes over quantum channels: i.i.d. codebooks, pretty-good
// measurement decoding, error evaluation, induced output states and the
// exhaustive enumerator for tiny block codes.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "qcap/random.hpp"
#include "qcap/states.hpp"

namespace qcap {

enum class EncoderKind { DeterministicBlock, DeterministicGeneral, StochasticAveraged };

std::string_view to_string(EncoderKind kind) noexcept;
/// Throws ParseError on an unknown name.
EncoderKind encoder_kind_from_string(std::string_view name);

/// One codeword in block form: slot i holds the input state of channel use i.
using BlockCodeword = std::vector<DensityMatrix>;

class ClassicalQuantumCode {
 public:
  /// Throws BadParameter for M = 0, ragged blocklengths or mixed slot
  /// dimensions, and DimensionMismatch when the decoder has fewer than M
  /// elements.
  static ClassicalQuantumCode block(std::vector<BlockCodeword> codewords, Povm decoder);
  /// Codewords given directly on the blocklength-fold input space.
  static ClassicalQuantumCode general(std::size_t blocklength, std::vector<DensityMatrix> codewords, Povm decoder,
                                      EncoderKind kind = EncoderKind::DeterministicGeneral);
  /// Stochastic encoder stored pre-averaged: message m sends sum_a p(a|m) rho_a.
  static ClassicalQuantumCode stochastic(std::size_t blocklength, std::span<const Ensemble> encoders, Povm decoder);

  std::size_t blocklength() const noexcept { return blocklength_; }
  std::size_t num_messages() const noexcept { return joint_.empty() ? slots_.size() : joint_.size(); }
  EncoderKind kind() const noexcept { return kind_; }
  bool is_block() const noexcept { return kind_ == EncoderKind::DeterministicBlock; }
  /// Dimension of the full input space of one codeword.
  std::size_t input_dim() const;

  /// Throws NotBlockCode unless is_block().
  const std::vector<BlockCodeword>& block_codewords() const;
  /// Codeword of message m on the blocklength-fold space.
  DensityMatrix codeword(std::size_t m) const;
  const Povm& decoder() const noexcept { return decoder_; }
  ClassicalQuantumCode with_decoder(Povm decoder) const;

 private:
  ClassicalQuantumCode(std::size_t n, EncoderKind kind, std::vector<BlockCodeword> slots,
                       std::vector<DensityMatrix> joint, Povm decoder);

  std::size_t blocklength_;
  EncoderKind kind_;
  std::vector<BlockCodeword> slots_;
  std::vector<DensityMatrix> joint_;
  Povm decoder_;
};

struct CodePerformance {
  double max_error = 0.0;
  double avg_error = 0.0;
  std::vector<double> per_message;
};

/// N^(x)n applied to every codeword, in message order. Block codewords are
/// pushed through slot by slot. Throws DimensionMismatch when the code does
/// not fit the channel.
std::vector<DenseMatrix> codeword_outputs(const ClassicalQuantumCode& code, const QuantumChannel& n);

/// per_message[m] = 1 - Tr(outputs[m] E_m), clamped to [0, 1].
CodePerformance decoding_performance(std::span<const DenseMatrix> outputs, const Povm& decoder);

CodePerformance evaluate_code(const ClassicalQuantumCode& code, const QuantumChannel& n);

/// Uniform-prior average of the channel outputs of all codewords.
DensityMatrix induced_output_state(const ClassicalQuantumCode& code, const QuantumChannel& n);

/// M codewords of `blocklength` i.i.d. symbols drawn from the ensemble.
/// Throws DimensionOverflow when dim_in^blocklength exceeds the dimension cap.
std::vector<BlockCodeword> random_codebook(const QuantumChannel& n, const Ensemble& e, std::size_t blocklength,
                                           std::size_t M, std::uint64_t seed);

/// E_m = S^{-1/2} p_m rho_m S^{-1/2}, S = sum p_m rho_m, inverse root on
/// supp(S); the remainder I - sum E_m is appended as an erasure element.
Povm pgm_decoder(std::span<const DenseMatrix> outputs, std::span<const double> priors);
Povm pgm_decoder(std::span<const DensityMatrix> outputs, std::span<const double> priors);

/// Random block code from `e` decoded by the PGM on its channel outputs.
ClassicalQuantumCode random_pgm_code(const QuantumChannel& n, const Ensemble& e, std::size_t blocklength,
                                     std::size_t M, std::uint64_t seed);

/// max(1, round(exp(rate * chi * blocklength)))
std::size_t messages_for_rate(double chi, double rate, std::size_t blocklength);

enum class DecoderFamily { Pgm, ProjectiveFromBasis };

inline constexpr double kDefaultEnumerationCap = 1e6;

/// Calls `visit` with every assignment of symbol indices to the M x n
/// codeword slots (message-major), in lexicographic order. Returns the count.
/// Throws EnumerationTooLarge when num_symbols^(n M) exceeds `cap`.
std::size_t enumerate_symbol_assignments(std::size_t num_symbols, std::size_t blocklength, std::size_t M,
                                         const std::function<void(std::span<const std::size_t>)>& visit,
                                         double cap = kDefaultEnumerationCap);

/// Every deterministic block code with slots drawn from `symbols`, paired with
/// its PGM decoder (built on the channel outputs, uniform priors) or with every
/// projective decoder that assigns each computational basis vector of the
/// output space to one message. `channel` defaults to the identity.
std::size_t enumerate_tiny_codes(std::span<const DensityMatrix> symbols, std::size_t blocklength, std::size_t M,
                                 DecoderFamily family, const std::function<void(const ClassicalQuantumCode&)>& visit,
                                 const QuantumChannel* channel = nullptr, double cap = kDefaultEnumerationCap);

}  // namespace qcap
