#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seqcd/alphabet_dist.hpp"

namespace seqcd {

// Incremental evaluation of a code-length function along one sequence.
class CodeEvaluator {
 public:
  virtual ~CodeEvaluator() = default;
  virtual void extend(Symbol s) = 0;
  virtual double length_bits() const = 0;
  virtual std::unique_ptr<CodeEvaluator> clone() const = 0;
};

// Family of Kraft-satisfying length functions L(x_1^n) in bits (ideal,
// real-valued lengths).
class CodeLengthFn {
 public:
  virtual ~CodeLengthFn() = default;
  virtual std::string name() const = 0;
  virtual const Alphabet& alphabet() const = 0;
  virtual std::unique_ptr<CodeEvaluator> evaluator() const = 0;

  double length(std::span<const Symbol> seq) const;
};

// Cached log2(c + 1/2) and log2(t + K/2) for the KT update. Grows on demand.
class KtLogTable {
 public:
  explicit KtLogTable(std::size_t alphabet_size, std::size_t reserve = 1024);

  double count_term(std::uint64_t c) {
    if (c >= count_.size()) grow(c);
    return count_[c];
  }
  double total_term(std::uint64_t t) {
    if (t >= total_.size()) grow(t);
    return total_[t];
  }

 private:
  void grow(std::uint64_t upto);

  double half_k_;
  std::vector<double> count_;
  std::vector<double> total_;
};

// Krichevsky-Trofimov (Dirichlet-1/2) sequential probability assignment.
struct KtState {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  double length_bits = 0.0;

  explicit KtState(std::size_t alphabet_size) : counts(alphabet_size, 0) {}
};

// Code length, in bits, of appending s: log2((t + K/2) / (c(s) + 1/2)).
inline double kt_increment(const KtState& st, Symbol s) {
  const double k_half = 0.5 * static_cast<double>(st.counts.size());
  return std::log2((static_cast<double>(st.total) + k_half) / (static_cast<double>(st.counts[s]) + 0.5));
}

// Throws InvalidArgument for a symbol outside the alphabet.
void kt_extend(KtState& st, Symbol s);

// -log2 of the KT probability of seq; 0 for the empty sequence.
double kt_length(std::span<const Symbol> seq, std::size_t alphabet_size);

class KTCoder final : public CodeLengthFn {
 public:
  explicit KTCoder(std::size_t alphabet_size) : alphabet_(alphabet_size) {}

  std::string name() const override { return "kt"; }
  const Alphabet& alphabet() const override { return alphabet_; }
  std::unique_ptr<CodeEvaluator> evaluator() const override;

 private:
  Alphabet alphabet_;
};

// Exhaustive enumeration guard: K^n must not exceed this.
inline constexpr std::uint64_t kMaxEnumeration = std::uint64_t{1} << 24;

// Sum over all length-n sequences of 2^-L. Throws TooLarge past kMaxEnumeration.
double kraft_sum(const CodeLengthFn& coder, std::size_t n);

enum class RedundancyMode { Exhaustive, Sampled };

struct RedundancyOptions {
  RedundancyMode mode = RedundancyMode::Exhaustive;
  std::size_t samples = 64;  // sampled mode only
  std::uint64_t seed = 1;    // sampled mode only
};

// max over sequences of L(x) + log2 dist(x). Sampled mode returns the max over
// `samples` sequences drawn i.i.d. from dist, a lower estimate.
double redundancy(const CodeLengthFn& coder, const Categorical& dist, std::size_t n,
                  const RedundancyOptions& opts = {});

}  // namespace seqcd
