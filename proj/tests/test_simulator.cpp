#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "seqcd/alphabet_dist.hpp"
#include "seqcd/error.hpp"
#include "seqcd/simulator.hpp"

using namespace seqcd;

namespace {

const Categorical kHalf({0.5, 0.5});
const Categorical kSkew({0.9, 0.1});
const Categorical kZero = Categorical::point_mass(2, 0);
const Categorical kOne = Categorical::point_mass(2, 1);

MonteCarloOptions mc(std::size_t trials, std::uint64_t seed, unsigned threads = 1) {
  return {.trials = trials, .seed = seed, .horizon = 0, .threads = threads};
}

}  // namespace

TEST_CASE("gen_stream") {
  const auto all_post = gen_stream({.mu0 = kZero, .mu1 = kOne, .change_point = 1, .horizon = 20, .seed = 1});
  CHECK(all_post.symbols == std::vector<Symbol>(20, 1));

  const auto no_change = gen_stream({.mu0 = kZero, .mu1 = kOne, .horizon = 20, .seed = 1});
  CHECK(no_change.symbols == std::vector<Symbol>(20, 0));

  const auto mid = gen_stream({.mu0 = kZero, .mu1 = kOne, .n0 = 3, .change_point = 5, .horizon = 10, .seed = 1});
  REQUIRE(mid.symbols.size() == 13u);
  CHECK(mid.prefix_length == 3u);
  for (std::size_t i = 0; i < 13; ++i) CHECK(mid.symbols[i] == (i >= 3 + 4 ? 1u : 0u));

  const StreamSpec spec{.mu0 = kHalf, .mu1 = kSkew, .n0 = 10, .change_point = 50, .horizon = 100, .seed = 9};
  CHECK(gen_stream(spec).symbols == gen_stream(spec).symbols);
}

TEST_CASE("summarize") {
  std::vector<TrialResult> t(4);
  t[0] = {.stop_time = 10, .delay = 5};
  t[1] = {.stop_time = 20, .delay = 7, .false_alarm = true};
  t[2] = {.stop_time = 30, .delay = 9, .censored = true};
  t[3] = {.stop_time = 40, .delay = 11};
  const auto s = summarize(t);
  CHECK(s.trials == 4u);
  CHECK(s.mean_stop_time == doctest::Approx(25.0));
  CHECK(s.var_stop_time == doctest::Approx(500.0 / 3.0));
  CHECK(s.mean_delay == doctest::Approx(8.0));
  CHECK(s.false_alarm_fraction == doctest::Approx(0.25));
  CHECK(s.censored_fraction == doctest::Approx(0.25));
  CHECK(s.delay_half_width == doctest::Approx(1.959963984540054 * std::sqrt(20.0 / 3.0 / 4.0)));
}

TEST_CASE("bound helpers") {
  CHECK(jb_error_bound(0.01, 0.5) == doctest::Approx(0.024142135623730944).epsilon(1e-12));
  CHECK(jb_arl_bound(8.0, 0.5) == doctest::Approx(3.313708498984761).epsilon(1e-12));
  CHECK(std::isinf(jb_error_bound(0.01, 0.0)));
  const double lb = std::log2(0.5 / 0.45);
  CHECK(empirical_error_bound(0.01, 0.5, lb, 0.0) == doctest::Approx(0.03665793880864171).epsilon(1e-10));
  CHECK(empirical_arl_bound(8.0, 0.5, lb, 0.0) == doctest::Approx(2.182337649086284).epsilon(1e-10));
  CHECK(empirical_arl_bound(8.0, 0.1, lb, 0.0) == 0.0);
  // n0 = 1e4, delta = 0.02 with the Hoeffding eps0.
  const double lb2 = std::log2(0.5 / 0.48);
  const double eps0 = 4.0 * std::exp(-8.0);
  CHECK(empirical_error_bound(0.01, 0.5, lb2, eps0) == doctest::Approx(0.02930253623122784).epsilon(1e-10));
  CHECK(empirical_arl_bound(8.0, 0.5, lb2, eps0) == doctest::Approx(2.850217463841403).epsilon(1e-10));
}

TEST_CASE("error probability, small run") {
  const auto r = estimate_error_prob(
      {.mode = DetectorMode::JBPage, .mu0 = kHalf, .lambda = 0.5, .alpha = 0.01,
       .mc = {.trials = 200, .seed = 3, .horizon = 10000, .threads = 1}});
  CHECK(r.summary.trials == 200u);
  CHECK(r.bound == doctest::Approx(0.024142135623730944));
  CHECK(r.pass);

  const auto tiny = estimate_error_prob(
      {.mode = DetectorMode::JBPage, .mu0 = kHalf, .lambda = 0.5, .alpha = 1e-12,
       .mc = {.trials = 100, .seed = 3, .horizon = 2000, .threads = 1}});
  CHECK(tiny.summary.false_alarm_fraction == 0.0);
}

TEST_CASE("ARL: huge threshold censors every trial at the horizon") {
  const auto r = estimate_arl0({.mode = DetectorMode::JBPage, .mu0 = kHalf, .lambda = 0.5, .gamma = 1e30,
                                .mc = {.trials = 20, .seed = 1, .horizon = 500, .threads = 1}});
  CHECK(r.summary.censored_fraction == 1.0);
  CHECK(r.summary.mean_stop_time == 500.0);
}

TEST_CASE("ARL bound holds on a small run") {
  const auto r = estimate_arl0({.mode = DetectorMode::JBPage, .mu0 = kHalf, .lambda = 0.5, .gamma = 8.0,
                                .mc = {.trials = 300, .seed = 5, .horizon = 0, .threads = 1}});
  CHECK(r.bound == doctest::Approx(3.313708498984761));
  CHECK(r.summary.mean_stop_time >= r.bound);
}

TEST_CASE("delay against a point-mass post-change law") {
  const auto r = estimate_worst_delay({.mode = DetectorMode::Empirical, .mu0 = kHalf, .mu1 = kZero, .lambda = 0.2,
                                       .threshold = 20.0, .n0 = 10000, .mc = mc(200, 11)});
  REQUIRE(r.warmup_counts.has_value());
  const double mu_hat0 = static_cast<double>((*r.warmup_counts)[0]) / 10000.0;
  const double predicted = 20.0 / (-std::log2(mu_hat0) - 0.2);
  CHECK(r.predicted_delay == doctest::Approx(predicted));
  CHECK(r.summary.mean_delay >= 0.7 * predicted);
  CHECK(r.summary.mean_delay <= 1.3 * predicted);
}

TEST_CASE("immediate change is at least as slow as a late one for Page") {
  auto setup = DelaySetup{.mode = DetectorMode::Page, .mu0 = kHalf, .mu1 = kSkew, .threshold = 8.0,
                          .change_point = 1, .mc = mc(2000, 2)};
  const auto early = estimate_worst_delay(setup);
  setup.change_point = 50;
  const auto late = estimate_worst_delay(setup);
  CHECK(early.summary.mean_delay + early.summary.delay_half_width + late.summary.delay_half_width >=
        late.summary.mean_delay);
}

TEST_CASE("delay ordering across detectors") {
  const auto base = DelaySetup{.mu0 = kHalf, .mu1 = kSkew, .lambda = 0.2, .threshold = 10.0, .mc = mc(1000, 4)};
  auto page = base;
  page.mode = DetectorMode::Page;
  auto jb = base;
  jb.mode = DetectorMode::JBPage;
  auto emp = base;
  emp.mode = DetectorMode::Empirical;
  emp.n0 = 100000;
  const auto dp = estimate_worst_delay(page).summary;
  const auto dj = estimate_worst_delay(jb).summary;
  const auto de = estimate_worst_delay(emp).summary;
  CHECK(dp.mean_delay <= dj.mean_delay + dp.delay_half_width + dj.delay_half_width);
  CHECK(std::abs(de.mean_delay - dj.mean_delay) <= 2.0 * (de.delay_half_width + dj.delay_half_width));
}

TEST_CASE("termination after the change") {
  const auto r = estimate_worst_delay({.mode = DetectorMode::JBPage, .mu0 = kHalf, .mu1 = kSkew, .lambda = 0.2,
                                       .threshold = std::log2(1000.0), .mc = mc(300, 6)});
  CHECK(r.summary.censored_fraction == 0.0);
  for (const auto& t : r.trials) CHECK(static_cast<double>(t.delay) <= 100.0 * r.predicted_delay);
}

TEST_CASE("results do not depend on the thread count") {
  auto setup = DelaySetup{.mode = DetectorMode::Empirical, .mu0 = kHalf, .mu1 = kSkew, .lambda = 0.2,
                          .threshold = 8.0, .n0 = 1000, .redraw_warmup = true, .mc = mc(64, 42, 1)};
  const auto one = estimate_worst_delay(setup);
  setup.mc.threads = 4;
  const auto four = estimate_worst_delay(setup);
  std::ostringstream a;
  std::ostringstream b;
  write_trials_csv(a, one.trials);
  write_trials_csv(b, four.trials);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("trial,seed,m,stop_time,delay,false_alarm,censored\n", 0) == 0);

  setup.mc.seed = 43;
  std::ostringstream c;
  write_trials_csv(c, estimate_worst_delay(setup).trials);
  CHECK(a.str() != c.str());
}

TEST_CASE("delay_slope residuals satisfy the normal equations") {
  const auto setup = DelaySetup{.mode = DetectorMode::JBPage, .mu0 = kHalf, .mu1 = kSkew, .lambda = 0.2,
                                .mc = mc(200, 8)};
  const std::vector<double> gammas{64.0, 256.0, 1024.0, 4096.0};
  const auto s = delay_slope(setup, gammas);
  REQUIRE(s.residuals.size() == gammas.size());
  double r_sum = 0.0;
  double rx_sum = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    r_sum += s.residuals[i];
    rx_sum += s.residuals[i] * s.log2_gammas[i];
  }
  CHECK(std::abs(r_sum) < 1e-8);
  CHECK(std::abs(rx_sum) < 1e-7);
  CHECK(s.slope > 0.0);
  CHECK(s.predicted_slope == doctest::Approx(1.0 / (0.5310044064107189 - 0.2)));
}

TEST_CASE("optimality helpers") {
  const double d = kl_divergence(kSkew, kHalf);
  CHECK(kappa_lambda(kHalf, kSkew, kHalf, 0.5) == doctest::Approx(d / 3.0));
  CHECK(kappa_lambda(kHalf, kSkew, kHalf, 0.5) == doctest::Approx(0.17700146880357297));
  const double lb = std::log2(0.5 / 0.45);
  CHECK(eta_threshold(4096.0, 0.5, lb) ==
        doctest::Approx(std::log2(4096.0 * (1.0 / (std::exp2(0.5 - lb) - 1.0) + 1.0))));
  try {
    eta_threshold(4096.0, 0.1, lb);
    FAIL("expected InfeasibleKappa");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleKappa);
  }
}

TEST_CASE("optimality experiment rejects an all-infeasible schedule") {
  // delta close to p_min makes log2 beta exceed every lambda.
  try {
    optimality_experiment({.mu0 = kHalf, .mu1 = kSkew, .kappa = 0.5, .gamma = 256.0, .n0_schedule = {100, 1000},
                           .delta = 0.45, .mc = mc(10, 1)});
    FAIL("expected InfeasibleKappa");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleKappa);
  }
}
