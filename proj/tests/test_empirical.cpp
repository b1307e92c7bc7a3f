#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqcd/alphabet_dist.hpp"
#include "seqcd/empirical.hpp"
#include "seqcd/error.hpp"

using namespace seqcd;

namespace {

EmpiricalEstimate from_counts(std::vector<std::uint64_t> counts) {
  const Alphabet a(counts.size());
  return EmpiricalEstimate(a, std::move(counts));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected seqcd::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("estimate_empirical") {
  const auto est = estimate_empirical(std::vector<Symbol>{0, 0, 1}, Alphabet(2));
  CHECK(est.counts() == std::vector<std::uint64_t>{2, 1});
  CHECK(est.n0() == 3);
  CHECK(est.mu_hat().probs()[0] == 2.0 / 3.0);
  CHECK(est.mu_hat().probs()[1] == 1.0 / 3.0);
  CHECK(est.full_support());

  const auto zeros = estimate_empirical(std::vector<Symbol>(10, 0), Alphabet(2));
  CHECK(zeros.mu_hat().probs() == std::vector<double>{1.0, 0.0});
  CHECK_FALSE(zeros.full_support());

  const auto big = sample_iid(Categorical::uniform(2), 100000, 99);
  const auto est_big = estimate_empirical(big.symbols, Alphabet(2));
  CHECK(std::abs(est_big.mu_hat().probs()[0] - 0.5) < 0.01);

  CHECK(code_of([] { estimate_empirical(std::vector<Symbol>{}, Alphabet(2)); }) == ErrorCode::EmptyPrefix);
  CHECK(code_of([] { estimate_empirical(std::vector<Symbol>{0, 2}, Alphabet(2)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("add-half smoothing is opt-in") {
  const auto est = from_counts({2, 0});
  CHECK(est.reference(Smoothing::None).probs() == std::vector<double>{1.0, 0.0});
  const auto smooth = est.reference(Smoothing::AddHalf);
  CHECK(smooth.probs()[0] == doctest::Approx(2.5 / 3.0));
  CHECK(smooth.probs()[1] == doctest::Approx(0.5 / 3.0));
}

TEST_CASE("check_deviation") {
  const Categorical mu0({0.5, 0.5});
  CHECK(check_deviation(from_counts({5, 5}), mu0, 1e-9).holds);
  CHECK_FALSE(check_deviation(from_counts({3, 2}), mu0, 0.05).holds);  // (0.6, 0.4)
  CHECK(check_deviation(from_counts({13, 12}), mu0, 0.05).holds);      // (0.52, 0.48)
  CHECK(check_deviation(from_counts({13, 12}), mu0, 0.05).max_deviation == doctest::Approx(0.02));
}

TEST_CASE("beta_bound") {
  CHECK(beta_bound(Categorical({0.2, 0.8}), 0.05) == doctest::Approx(4.0 / 3.0));
  CHECK(std::log2(beta_bound(Categorical({0.2, 0.8}), 0.05)) == doctest::Approx(0.41503749927884376));
  CHECK(beta_bound(Categorical({0.2, 0.8}), 0.0) == 1.0);
  CHECK(code_of([] { beta_bound(Categorical({0.1, 0.9}), 0.1); }) == ErrorCode::DeltaTooLarge);
  // p_min ignores zero-probability symbols.
  CHECK(beta_bound(Categorical({0.0, 0.4, 0.6}), 0.2) == doctest::Approx(2.0));
}

TEST_CASE("fn_statistic") {
  const Categorical mu0({0.5, 0.5});
  CHECK(fn_statistic(mu0, from_counts({4, 4}), std::vector<Symbol>{0, 1, 1, 0, 1}) == 0.0);
  CHECK(fn_statistic(mu0, from_counts({1, 3}), std::vector<Symbol>{0}) == doctest::Approx(1.0));
  CHECK(code_of([&] { fn_statistic(mu0, from_counts({4, 0}), std::vector<Symbol>{1}); }) ==
        ErrorCode::SupportMismatch);
}

TEST_CASE("log-ratio bound, likelihood identity and divergence gap on random instances") {
  Rng rng(31337);
  int checked = 0;
  while (checked < 2000) {
    const std::size_t k = 2 + rng.next_u64() % 4;
    std::vector<double> p(k);
    double sum = 0.0;
    for (auto& x : p) sum += (x = 0.2 + rng.uniform());
    for (auto& x : p) x /= sum;
    const Categorical mu0(p);
    const double delta = mu0.min_positive_prob() * (0.1 + 0.8 * rng.uniform());
    std::vector<Symbol> prefix;
    sample_iid(mu0, 30 + rng.next_u64() % 500, rng, prefix);
    const auto est = estimate_empirical(prefix, Alphabet(k));
    if (!check_deviation(est, mu0, delta).holds) continue;
    ++checked;

    std::vector<Symbol> seq;
    sample_iid(Categorical::uniform(k), 1 + rng.next_u64() % 100, rng, seq);
    const double log2_beta = std::log2(beta_bound(mu0, delta));
    const double fn = fn_statistic(mu0, est, seq);
    CHECK(fn <= log2_beta);

    // mu0(x) = mu_hat(x) 2^(n f_n), compared in the log domain.
    const double lhs = log_prob_sequence(mu0, seq);
    const double rhs = log_prob_sequence(est.mu_hat(), seq) + static_cast<double>(seq.size()) * fn;
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));

    const Categorical mu1 = Categorical::uniform(k);
    CHECK(kl_divergence(mu1, est.mu_hat()) - kl_divergence(mu1, mu0) < log2_beta);
  }
}

TEST_CASE("lambda_window") {
  const Categorical mu0({0.5, 0.5});
  const Categorical mu1({0.9, 0.1});

  const auto w = lambda_window(mu0, mu1, from_counts({1, 1}), 0.0);
  CHECK(w.lo == 0.0);
  CHECK(w.hi == doctest::Approx(0.5310044064107189).epsilon(1e-12));
  CHECK(w.contains(0.2));
  CHECK_FALSE(w.contains(0.6));

  CHECK(code_of([&] { lambda_window(mu0, mu0, from_counts({1, 1}), 0.0); }) == ErrorCode::EmptyWindow);
  CHECK(code_of([&] { lambda_window(mu0, mu1, from_counts({1, 0}), 0.0); }) == ErrorCode::SupportMismatch);

  // mu_hat = (0.52, 0.48), delta = 0.05: log2 beta = log2(0.5/0.45) dominates D(mu0 || mu_hat).
  const auto w2 = lambda_window(mu0, mu1, from_counts({13, 12}), 0.05);
  CHECK(w2.lo == doctest::Approx(0.15200309344505006).epsilon(1e-12));
  CHECK(w2.hi == doctest::Approx(0.485968599786345).epsilon(1e-12));
  CHECK(w2.lo < w2.hi);
}

TEST_CASE("deviation failures become rarer as n0 grows") {
  const Categorical mu0({0.3, 0.7});
  const double delta = 0.05;
  auto failure_rate = [&](std::size_t n0) {
    Rng rng(derive_seed(4, n0));
    int failures = 0;
    std::vector<Symbol> prefix;
    for (int t = 0; t < 2000; ++t) {
      sample_iid(mu0, n0, rng, prefix);
      failures += check_deviation(estimate_empirical(prefix, Alphabet(2)), mu0, delta).holds ? 0 : 1;
    }
    return failures / 2000.0;
  };
  const double small = failure_rate(100);
  const double large = failure_rate(1000);
  CHECK(large < small);
  CHECK(large <= hoeffding_epsilon0(2, 1000, delta));
}

TEST_CASE("hoeffding_epsilon0") {
  CHECK(hoeffding_epsilon0(2, 10000, 0.02) == doctest::Approx(4.0 * std::exp(-8.0)));
  CHECK(hoeffding_epsilon0(2, 1, 0.01) == 1.0);
}
