#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seqcd/rng.hpp"

namespace seqcd {

using Symbol = std::uint32_t;

// Finite source alphabet {0, ..., size-1}.
class Alphabet {
 public:
  explicit Alphabet(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  bool contains(Symbol s) const noexcept { return s < size_; }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::size_t size_;
};

/**
 * Probability vector over an Alphabet.
 *
 * Inputs whose sum is within 1e-9 of one are renormalized; anything further
 * off is rejected with InvalidDistribution. Negative or non-finite entries are
 * always rejected.
 */
class Categorical {
 public:
  explicit Categorical(std::vector<double> probs);

  static Categorical uniform(std::size_t k);
  static Categorical point_mass(std::size_t k, Symbol s);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return probs_.size(); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  double prob(Symbol s) const { return probs_.at(s); }
  // log2 prob(s); -inf outside the support.
  double log2_prob(Symbol s) const { return log2_probs_.at(s); }

  bool in_support(Symbol s) const { return probs_.at(s) > 0.0; }
  std::vector<Symbol> support() const;
  bool full_support() const noexcept;
  // Smallest strictly positive probability.
  double min_positive_prob() const noexcept;

  Symbol sample(Rng& rng) const;

  friend bool operator==(const Categorical& a, const Categorical& b) { return a.probs_ == b.probs_; }

 private:
  Alphabet alphabet_;
  std::vector<double> probs_;
  std::vector<double> log2_probs_;
  std::vector<double> cdf_;
};

struct SymbolStream {
  std::size_t alphabet_size = 2;
  std::vector<Symbol> symbols;
  // Change point, 1-based, counted in post-warm-up symbols.
  std::optional<std::size_t> change_point;
  std::optional<std::size_t> prefix_length;

  std::size_t size() const noexcept { return symbols.size(); }
  std::span<const Symbol> view() const noexcept { return symbols; }
};

// Throws InvalidArgument if any symbol is outside the alphabet.
void check_symbols(std::span<const Symbol> seq, std::size_t alphabet_size);

// Shannon entropy in bits.
double entropy(const Categorical& dist);

// D(mu || nu) in bits. Throws SupportMismatch when mu is not absolutely
// continuous w.r.t. nu.
double kl_divergence(const Categorical& mu, const Categorical& nu);

SymbolStream sample_iid(const Categorical& dist, std::size_t n, std::uint64_t seed);
void sample_iid(const Categorical& dist, std::size_t n, Rng& rng, std::vector<Symbol>& out);

// Sum of log2 dist(x_i); throws SupportMismatch on a zero-probability symbol.
double log_prob_sequence(const Categorical& dist, std::span<const Symbol> seq);

}  // namespace seqcd
