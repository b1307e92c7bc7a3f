#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seqcd/alphabet_dist.hpp"

namespace seqcd {

enum class Smoothing { None, AddHalf };

// Symbol counts over the warm-up prefix and the derived frequency estimate.
class EmpiricalEstimate {
 public:
  EmpiricalEstimate(Alphabet alphabet, std::vector<std::uint64_t> counts);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t n0() const noexcept { return n0_; }
  bool full_support() const noexcept;

  // counts(a) / n0.
  const Categorical& mu_hat() const noexcept { return mu_hat_; }

  // Reference distribution a detector runs against: mu_hat, or (c+1/2)/(n0+K/2).
  Categorical reference(Smoothing smoothing) const;

 private:
  Alphabet alphabet_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n0_ = 0;
  Categorical mu_hat_;
};

EmpiricalEstimate estimate_empirical(std::span<const Symbol> prefix, const Alphabet& alphabet);

struct DeviationEvent {
  double delta = 0.0;
  double max_deviation = 0.0;
  bool holds = false;
};

// holds <=> max_a |mu_hat(a) - mu0(a)| < delta.
DeviationEvent check_deviation(const EmpiricalEstimate& est, const Categorical& mu0, double delta);

// p_min / (p_min - delta) with p_min the smallest positive mu0 probability.
double beta_bound(const Categorical& mu0, double delta);

// (1/n) log2(mu0(seq) / mu_hat(seq)). Zero for an empty sequence.
double fn_statistic(const Categorical& mu0, const EmpiricalEstimate& est, std::span<const Symbol> seq);

struct LambdaWindow {
  double lo = 0.0;  // max(log2 beta, D(mu0 || mu_hat))
  double hi = 0.0;  // D(mu1 || mu_hat)

  bool contains(double lambda) const noexcept { return lo < lambda && lambda < hi; }
};

// Throws EmptyWindow when lo >= hi, SupportMismatch when mu_hat lacks support.
LambdaWindow lambda_window(const Categorical& mu0, const Categorical& mu1, const EmpiricalEstimate& est,
                           double delta);

// Hoeffding union bound on P(deviation event fails): min(1, 2K exp(-2 n0 delta^2)).
double hoeffding_epsilon0(std::size_t alphabet_size, std::uint64_t n0, double delta);

}  // namespace seqcd
