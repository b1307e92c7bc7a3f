#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "seqcd/alphabet_dist.hpp"
#include "seqcd/error.hpp"

using namespace seqcd;

namespace {

Categorical random_dist(std::size_t k, Rng& rng) {
  std::vector<double> p(k);
  double sum = 0.0;
  for (auto& x : p) {
    x = rng.uniform();
    sum += x;
  }
  for (auto& x : p) x /= sum;
  return Categorical(p);
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

TEST_CASE("Categorical construction") {
  CHECK_THROWS_AS(Alphabet(1), Error);
  CHECK(code_of([] { Categorical({0.5, 0.4}); }) == ErrorCode::InvalidDistribution);
  CHECK(code_of([] { Categorical({1.2, -0.2}); }) == ErrorCode::InvalidDistribution);
  CHECK(code_of([] { Categorical({0.5, NAN}); }) == ErrorCode::InvalidDistribution);

  const Categorical near({0.5 + 5e-10, 0.5});
  double sum = near.probs()[0] + near.probs()[1];
  CHECK(std::abs(sum - 1.0) <= 1e-12);

  const Categorical d({0.0, 0.25, 0.75});
  CHECK(d.support() == std::vector<Symbol>{1, 2});
  CHECK_FALSE(d.full_support());
  CHECK(d.min_positive_prob() == 0.25);
  CHECK(std::isinf(d.log2_prob(0)));
}

TEST_CASE("entropy") {
  CHECK(entropy(Categorical::uniform(4)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(entropy(Categorical::point_mass(3, 1)) == 0.0);
  CHECK(entropy(Categorical({0.9, 0.1})) == doctest::Approx(0.4689955935892812).epsilon(1e-12));
}

TEST_CASE("kl_divergence") {
  const Categorical mu({0.3, 0.7});
  CHECK(kl_divergence(mu, mu) == 0.0);
  CHECK(kl_divergence(Categorical({0.5, 0.5}), Categorical({0.25, 0.75})) ==
        doctest::Approx(0.20751874963942185).epsilon(1e-12));
  CHECK(code_of([] { kl_divergence(Categorical({1.0, 0.0}), Categorical({0.0, 1.0})); }) ==
        ErrorCode::SupportMismatch);
  // Zero mass under mu is fine even where nu vanishes elsewhere.
  CHECK(kl_divergence(Categorical({0.0, 1.0}), Categorical({0.5, 0.5})) == doctest::Approx(1.0));
}

TEST_CASE("sample_iid") {
  CHECK(sample_iid(Categorical::uniform(2), 0, 1).symbols.empty());
  CHECK(sample_iid(Categorical::point_mass(3, 2), 5, 9).symbols == std::vector<Symbol>(5, 2));

  const auto big = sample_iid(Categorical::uniform(2), 1000000, 12345);
  const double zeros = static_cast<double>(std::count(big.symbols.begin(), big.symbols.end(), 0u));
  CHECK(std::abs(zeros / 1e6 - 0.5) < 0.002);

  SUBCASE("same seed gives the same stream, other seeds differ") {
    const Categorical d({0.2, 0.3, 0.5});
    CHECK(sample_iid(d, 1000, 77).symbols == sample_iid(d, 1000, 77).symbols);
    CHECK(sample_iid(d, 1000, 77).symbols != sample_iid(d, 1000, 78).symbols);
  }

  SUBCASE("zero-probability symbols never appear") {
    const auto s = sample_iid(Categorical({0.5, 0.0, 0.5}), 10000, 3);
    CHECK(std::count(s.symbols.begin(), s.symbols.end(), 1u) == 0);
  }
}

TEST_CASE("log_prob_sequence") {
  CHECK(log_prob_sequence(Categorical::uniform(2), std::vector<Symbol>{}) == 0.0);
  CHECK(log_prob_sequence(Categorical::uniform(2), std::vector<Symbol>(8, 1)) == -8.0);
  CHECK(log_prob_sequence(Categorical({0.9, 0.1}), std::vector<Symbol>{0, 1}) ==
        doctest::Approx(-3.473931188332412).epsilon(1e-12));
  CHECK(code_of([] { log_prob_sequence(Categorical({1.0, 0.0}), std::vector<Symbol>{1}); }) ==
        ErrorCode::SupportMismatch);
}

TEST_CASE("information-measure properties on random distributions") {
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = 2 + rng.next_u64() % 6;
    const auto mu = random_dist(k, rng);
    const auto nu = random_dist(k, rng);
    const double h = entropy(mu);
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(static_cast<double>(k)) + 1e-12);
    CHECK(kl_divergence(mu, nu) > 0.0);
    CHECK(kl_divergence(mu, mu) == 0.0);

    std::vector<Symbol> a;
    std::vector<Symbol> b;
    sample_iid(mu, 1 + rng.next_u64() % 50, rng, a);
    sample_iid(mu, 1 + rng.next_u64() % 50, rng, b);
    std::vector<Symbol> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    CHECK(log_prob_sequence(mu, ab) == doctest::Approx(log_prob_sequence(mu, a) + log_prob_sequence(mu, b)));
  }
}

TEST_CASE("substreams are reproducible and distinct") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng a = substream(5, 3);
  Rng b = substream(5, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng u(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}
