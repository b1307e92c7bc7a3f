#include "seqcd/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "seqcd/error.hpp"

namespace seqcd {

namespace {

std::uint64_t total(const std::vector<std::uint64_t>& counts) {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Categorical frequencies(const std::vector<std::uint64_t>& counts) {
  const std::uint64_t n = total(counts);
  if (n == 0) throw Error(ErrorCode::EmptyPrefix, "no symbols to estimate from");
  std::vector<double> p(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) {
    p[a] = static_cast<double>(counts[a]) / static_cast<double>(n);
  }
  return Categorical(std::move(p));
}

}  // namespace

EmpiricalEstimate::EmpiricalEstimate(Alphabet alphabet, std::vector<std::uint64_t> counts)
    : alphabet_(alphabet), counts_(std::move(counts)), n0_(total(counts_)), mu_hat_(frequencies(counts_)) {
  if (counts_.size() != alphabet_.size()) {
    throw Error(ErrorCode::InvalidArgument, "count vector length does not match alphabet");
  }
}

bool EmpiricalEstimate::full_support() const noexcept {
  return std::all_of(counts_.begin(), counts_.end(), [](std::uint64_t c) { return c > 0; });
}

Categorical EmpiricalEstimate::reference(Smoothing smoothing) const {
  if (smoothing == Smoothing::None) return mu_hat_;
  const double denom = static_cast<double>(n0_) + 0.5 * static_cast<double>(counts_.size());
  std::vector<double> p(counts_.size());
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    p[a] = (static_cast<double>(counts_[a]) + 0.5) / denom;
  }
  return Categorical(std::move(p));
}

EmpiricalEstimate estimate_empirical(std::span<const Symbol> prefix, const Alphabet& alphabet) {
  if (prefix.empty()) throw Error(ErrorCode::EmptyPrefix, "warm-up prefix is empty");
  check_symbols(prefix, alphabet.size());
  std::vector<std::uint64_t> counts(alphabet.size(), 0);
  for (Symbol s : prefix) ++counts[s];
  return EmpiricalEstimate(alphabet, std::move(counts));
}

DeviationEvent check_deviation(const EmpiricalEstimate& est, const Categorical& mu0, double delta) {
  if (mu0.size() != est.alphabet().size()) {
    throw Error(ErrorCode::InvalidArgument, "alphabet sizes differ");
  }
  DeviationEvent ev;
  ev.delta = delta;
  for (std::size_t a = 0; a < mu0.size(); ++a) {
    ev.max_deviation = std::max(ev.max_deviation, std::abs(est.mu_hat().probs()[a] - mu0.probs()[a]));
  }
  ev.holds = ev.max_deviation < delta;
  return ev;
}

double beta_bound(const Categorical& mu0, double delta) {
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be non-negative");
  const double p_min = mu0.min_positive_prob();
  if (delta >= p_min) {
    throw Error(ErrorCode::DeltaTooLarge,
                "delta " + std::to_string(delta) + " >= smallest probability " + std::to_string(p_min));
  }
  return p_min / (p_min - delta);
}

double fn_statistic(const Categorical& mu0, const EmpiricalEstimate& est, std::span<const Symbol> seq) {
  if (seq.empty()) return 0.0;
  // Per-symbol form: sum_a N(a|seq)/n * log2(mu0(a)/mu_hat(a)).
  std::vector<std::uint64_t> counts(mu0.size(), 0);
  for (Symbol s : seq) {
    if (s >= mu0.size()) throw Error(ErrorCode::InvalidArgument, "symbol outside alphabet");
    ++counts[s];
  }
  const auto& hat = est.mu_hat();
  double f = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) continue;
    if (mu0.probs()[a] == 0.0 || hat.probs()[a] == 0.0) {
      throw Error(ErrorCode::SupportMismatch, "symbol " + std::to_string(a) + " outside the common support");
    }
    f += static_cast<double>(counts[a]) * (mu0.log2_prob(a) - hat.log2_prob(a));
  }
  return f / static_cast<double>(seq.size());
}

LambdaWindow lambda_window(const Categorical& mu0, const Categorical& mu1, const EmpiricalEstimate& est,
                           double delta) {
  if (!est.full_support()) {
    throw Error(ErrorCode::SupportMismatch, "empirical estimate has zero-count symbols");
  }
  LambdaWindow w;
  w.lo = std::max(std::log2(beta_bound(mu0, delta)), kl_divergence(mu0, est.mu_hat()));
  w.hi = kl_divergence(mu1, est.mu_hat());
  if (w.lo >= w.hi) {
    throw Error(ErrorCode::EmptyWindow,
                "lambda window (" + std::to_string(w.lo) + ", " + std::to_string(w.hi) + ") is empty");
  }
  return w;
}

double hoeffding_epsilon0(std::size_t alphabet_size, std::uint64_t n0, double delta) {
  const double b = 2.0 * static_cast<double>(alphabet_size) *
                   std::exp(-2.0 * static_cast<double>(n0) * delta * delta);
  return std::min(1.0, b);
}

}  // namespace seqcd
