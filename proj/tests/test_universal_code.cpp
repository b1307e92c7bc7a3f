#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "seqcd/alphabet_dist.hpp"
#include "seqcd/error.hpp"
#include "seqcd/universal_code.hpp"

using namespace seqcd;

namespace {

// Closed-form KT code length from lgamma:
// P(x) = Gamma(K/2) / Gamma(n + K/2) * prod_a Gamma(c_a + 1/2) / Gamma(1/2).
double kt_closed_form(const std::vector<std::uint64_t>& counts) {
  const double k = static_cast<double>(counts.size());
  double n = 0.0;
  double ln_p = std::lgamma(k / 2.0);
  for (auto c : counts) {
    n += static_cast<double>(c);
    ln_p += std::lgamma(static_cast<double>(c) + 0.5) - std::lgamma(0.5);
  }
  ln_p -= std::lgamma(n + k / 2.0);
  return -ln_p / std::log(2.0);
}

std::vector<std::uint64_t> count_symbols(const std::vector<Symbol>& seq, std::size_t k) {
  std::vector<std::uint64_t> c(k, 0);
  for (auto s : seq) ++c[s];
  return c;
}

}  // namespace

TEST_CASE("kt_length frozen values") {
  CHECK(kt_length(std::vector<Symbol>{}, 2) == 0.0);
  CHECK(kt_length(std::vector<Symbol>{0}, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kt_length(std::vector<Symbol>{0, 0}, 2) == doctest::Approx(1.4150374992788437).epsilon(1e-12));
  CHECK(kt_length(std::vector<Symbol>{0, 1}, 2) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("kt_extend") {
  KtState st(2);
  kt_extend(st, 0);
  CHECK(st.length_bits == doctest::Approx(1.0));
  const double before = st.length_bits;
  CHECK(kt_increment(st, 0) == doctest::Approx(0.41503749927884376).epsilon(1e-12));
  kt_extend(st, 0);
  CHECK(st.length_bits - before == doctest::Approx(0.41503749927884376).epsilon(1e-12));
  CHECK_THROWS_AS(kt_extend(st, 2), Error);
}

TEST_CASE("KT: incremental, batch, closed form and permutation agree") {
  Rng rng(77);
  for (int i = 0; i < 300; ++i) {
    const std::size_t k = 2 + rng.next_u64() % 5;
    std::vector<Symbol> seq;
    sample_iid(Categorical::uniform(k), rng.next_u64() % 2000, rng, seq);

    KtState st(k);
    for (auto s : seq) kt_extend(st, s);
    const double batch = kt_length(seq, k);
    const double tol = 1e-9 * std::max(1.0, batch);
    CHECK(std::abs(st.length_bits - batch) <= tol);
    CHECK(std::abs(batch - kt_closed_form(count_symbols(seq, k))) <= tol);

    const auto coder = KTCoder(k);
    auto ev = coder.evaluator();
    for (auto s : seq) ev->extend(s);
    CHECK(std::abs(ev->length_bits() - batch) <= tol);

    std::vector<Symbol> shuffled = seq;
    std::reverse(shuffled.begin(), shuffled.end());
    for (std::size_t j = shuffled.size(); j > 1; --j) std::swap(shuffled[j - 1], shuffled[rng.next_u64() % j]);
    CHECK(std::abs(kt_length(shuffled, k) - batch) <= tol);
  }
}

TEST_CASE("KtLogTable matches direct logs") {
  KtLogTable table(3, 4);
  for (std::uint64_t c = 0; c < 5000; c += 7) {
    CHECK(table.count_term(c) == std::log2(static_cast<double>(c) + 0.5));
    CHECK(table.total_term(c) == std::log2(static_cast<double>(c) + 1.5));
  }
}

TEST_CASE("kraft_sum") {
  CHECK(kraft_sum(KTCoder(2), 0) == doctest::Approx(1.0));
  CHECK(kraft_sum(KTCoder(2), 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(kraft_sum(KTCoder(3), 4) - 1.0) <= 1e-9);
  for (std::size_t n = 1; n <= 12; ++n) CHECK(kraft_sum(KTCoder(2), n) <= 1.0 + 1e-9);
  try {
    kraft_sum(KTCoder(2), 25);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("redundancy") {
  const KTCoder coder(2);
  CHECK(redundancy(coder, Categorical::uniform(2), 0) == 0.0);

  const double r12 = redundancy(coder, Categorical::uniform(2), 12);
  CHECK(r12 <= 0.5 * std::log2(12.0) + 2.0);

  // Under the uniform source L + log2 mu depends only on the counts.
  double oracle = -INFINITY;
  for (std::uint64_t c0 = 0; c0 <= 12; ++c0) oracle = std::max(oracle, kt_closed_form({c0, 12 - c0}) - 12.0);
  CHECK(r12 == doctest::Approx(oracle).epsilon(1e-10));

  // Same for a skewed source, where the log-probability term varies with counts.
  const Categorical skew({0.8, 0.2});
  double oracle_skew = -INFINITY;
  for (std::uint64_t c0 = 0; c0 <= 10; ++c0) {
    const double lp = static_cast<double>(c0) * std::log2(0.8) + static_cast<double>(10 - c0) * std::log2(0.2);
    oracle_skew = std::max(oracle_skew, kt_closed_form({c0, 10 - c0}) + lp);
  }
  CHECK(redundancy(coder, skew, 10) == doctest::Approx(oracle_skew).epsilon(1e-10));

  const RedundancyOptions sampled{.mode = RedundancyMode::Sampled, .samples = 64, .seed = 5};
  const double rs = redundancy(coder, Categorical::uniform(2), 4096, sampled);
  const double rsmall = redundancy(coder, Categorical::uniform(2), 64, sampled);
  CHECK(rs / 4096.0 < rsmall / 64.0);
  CHECK(rs <= 0.5 * std::log2(4096.0) + 2.0);
}
