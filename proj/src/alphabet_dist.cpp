#include "seqcd/alphabet_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqcd/error.hpp"

namespace seqcd {

namespace {

constexpr double kNormalizeTolerance = 1e-9;
constexpr double kSumTolerance = 1e-12;

}  // namespace

Alphabet::Alphabet(std::size_t size) : size_(size) {
  if (size < 2) {
    throw Error(ErrorCode::InvalidArgument, "alphabet size must be >= 2, got " + std::to_string(size));
  }
}

Categorical::Categorical(std::vector<double> probs) : alphabet_(probs.size()), probs_(std::move(probs)) {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::InvalidDistribution, "probability " + std::to_string(i) + " is negative or not finite");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormalizeTolerance) {
    throw Error(ErrorCode::InvalidDistribution, "probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    for (double& p : probs_) p /= sum;
  }

  log2_probs_.resize(probs_.size());
  cdf_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    log2_probs_[i] = probs_[i] > 0.0 ? std::log2(probs_[i]) : -std::numeric_limits<double>::infinity();
    acc += probs_[i];
    cdf_[i] = acc;
  }
  // Last positive-probability entry closes the cdf so that u in [0,1) always lands.
  for (std::size_t i = probs_.size(); i-- > 0;) {
    if (probs_[i] > 0.0) {
      for (std::size_t j = i; j < probs_.size(); ++j) cdf_[j] = 1.0;
      break;
    }
  }
}

Categorical Categorical::uniform(std::size_t k) {
  return Categorical(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

Categorical Categorical::point_mass(std::size_t k, Symbol s) {
  std::vector<double> p(k, 0.0);
  p.at(s) = 1.0;
  return Categorical(std::move(p));
}

std::vector<Symbol> Categorical::support() const {
  std::vector<Symbol> out;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > 0.0) out.push_back(static_cast<Symbol>(i));
  }
  return out;
}

bool Categorical::full_support() const noexcept {
  return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; });
}

double Categorical::min_positive_prob() const noexcept {
  double m = 1.0;
  for (double p : probs_) {
    if (p > 0.0) m = std::min(m, p);
  }
  return m;
}

Symbol Categorical::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<Symbol>(it - cdf_.begin());
}

void check_symbols(std::span<const Symbol> seq, std::size_t alphabet_size) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] >= alphabet_size) {
      throw Error(ErrorCode::InvalidArgument, "symbol " + std::to_string(seq[i]) + " at position " +
                                                  std::to_string(i) + " outside alphabet of size " +
                                                  std::to_string(alphabet_size));
    }
  }
}

double entropy(const Categorical& dist) {
  double h = 0.0;
  for (double p : dist.probs()) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double kl_divergence(const Categorical& mu, const Categorical& nu) {
  if (mu.size() != nu.size()) {
    throw Error(ErrorCode::SupportMismatch, "alphabet sizes differ");
  }
  double d = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    const double p = mu.probs()[a];
    if (p == 0.0) continue;
    const double q = nu.probs()[a];
    if (q == 0.0) {
      throw Error(ErrorCode::SupportMismatch, "symbol " + std::to_string(a) + " has mass under mu but not under nu");
    }
    d += p * std::log2(p / q);
  }
  // Rounding can leave a tiny negative value when mu == nu.
  return std::max(d, 0.0);
}

void sample_iid(const Categorical& dist, std::size_t n, Rng& rng, std::vector<Symbol>& out) {
  out.resize(n);
  for (auto& s : out) s = dist.sample(rng);
}

SymbolStream sample_iid(const Categorical& dist, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SymbolStream stream;
  stream.alphabet_size = dist.size();
  sample_iid(dist, n, rng, stream.symbols);
  return stream;
}

double log_prob_sequence(const Categorical& dist, std::span<const Symbol> seq) {
  double total = 0.0;
  for (Symbol s : seq) {
    if (s >= dist.size() || !dist.in_support(s)) {
      throw Error(ErrorCode::SupportMismatch, "symbol " + std::to_string(s) + " has zero probability");
    }
    total += dist.log2_prob(s);
  }
  return total;
}

}  // namespace seqcd
