#include "seqcd/universal_code.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "seqcd/error.hpp"

namespace seqcd {

namespace {

class KtEvaluator final : public CodeEvaluator {
 public:
  explicit KtEvaluator(std::size_t k) : state_(k) {}

  void extend(Symbol s) override { kt_extend(state_, s); }
  double length_bits() const override { return state_.length_bits; }
  std::unique_ptr<CodeEvaluator> clone() const override { return std::make_unique<KtEvaluator>(*this); }

 private:
  KtState state_;
};

void check_enumerable(std::size_t k, std::size_t n) {
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    count *= k;
    if (count > kMaxEnumeration) {
      throw Error(ErrorCode::TooLarge, std::to_string(k) + "^" + std::to_string(n) + " sequences exceed 2^24");
    }
  }
}

// Depth-first walk over all length-`depth` extensions; calls leaf(evaluator, log2 weight).
template <typename Leaf>
void enumerate(const CodeEvaluator& eval, const Categorical* dist, double log_weight, std::size_t depth,
               std::size_t k, Leaf&& leaf) {
  if (depth == 0) {
    leaf(eval, log_weight);
    return;
  }
  for (Symbol s = 0; s < k; ++s) {
    double w = log_weight;
    if (dist != nullptr) {
      if (!dist->in_support(s)) continue;
      w += dist->log2_prob(s);
    }
    auto next = eval.clone();
    next->extend(s);
    enumerate(*next, dist, w, depth - 1, k, leaf);
  }
}

}  // namespace

double CodeLengthFn::length(std::span<const Symbol> seq) const {
  auto eval = evaluator();
  for (Symbol s : seq) eval->extend(s);
  return eval->length_bits();
}

KtLogTable::KtLogTable(std::size_t alphabet_size, std::size_t reserve)
    : half_k_(0.5 * static_cast<double>(alphabet_size)) {
  grow(reserve);
}

void KtLogTable::grow(std::uint64_t upto) {
  const std::size_t target = std::max<std::size_t>(upto + 1, 2 * count_.size());
  const std::size_t old = count_.size();
  count_.resize(target);
  total_.resize(target);
  for (std::size_t i = old; i < target; ++i) {
    count_[i] = std::log2(static_cast<double>(i) + 0.5);
    total_[i] = std::log2(static_cast<double>(i) + half_k_);
  }
}

void kt_extend(KtState& st, Symbol s) {
  if (s >= st.counts.size()) {
    throw Error(ErrorCode::InvalidArgument, "symbol " + std::to_string(s) + " outside alphabet");
  }
  st.length_bits += kt_increment(st, s);
  ++st.counts[s];
  ++st.total;
}

double kt_length(std::span<const Symbol> seq, std::size_t alphabet_size) {
  KtState st(alphabet_size);
  for (Symbol s : seq) kt_extend(st, s);
  return st.length_bits;
}

std::unique_ptr<CodeEvaluator> KTCoder::evaluator() const {
  return std::make_unique<KtEvaluator>(alphabet_.size());
}

double kraft_sum(const CodeLengthFn& coder, std::size_t n) {
  const std::size_t k = coder.alphabet().size();
  check_enumerable(k, n);
  // Sum 2^-L per leaf; leaves are visited in lexicographic order so the result
  // is deterministic.
  double sum = 0.0;
  auto root = coder.evaluator();
  enumerate(*root, nullptr, 0.0, n, k,
            [&](const CodeEvaluator& e, double) { sum += std::exp2(-e.length_bits()); });
  return sum;
}

double redundancy(const CodeLengthFn& coder, const Categorical& dist, std::size_t n,
                  const RedundancyOptions& opts) {
  const std::size_t k = coder.alphabet().size();
  if (dist.size() != k) throw Error(ErrorCode::InvalidArgument, "distribution and coder alphabets differ");
  if (n == 0) return 0.0;

  double best = -std::numeric_limits<double>::infinity();
  if (opts.mode == RedundancyMode::Exhaustive) {
    check_enumerable(k, n);
    auto root = coder.evaluator();
    enumerate(*root, &dist, 0.0, n, k,
              [&](const CodeEvaluator& e, double log_p) { best = std::max(best, e.length_bits() + log_p); });
    return best;
  }

  Rng rng(opts.seed);
  for (std::size_t i = 0; i < opts.samples; ++i) {
    auto eval = coder.evaluator();
    double log_p = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const Symbol s = dist.sample(rng);
      eval->extend(s);
      log_p += dist.log2_prob(s);
    }
    best = std::max(best, eval->length_bits() + log_p);
  }
  return best;
}

}  // namespace seqcd
