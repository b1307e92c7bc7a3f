#include "seqcd/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "seqcd/detectors.hpp"
#include "seqcd/empirical.hpp"
#include "seqcd/error.hpp"
#include "seqcd/simulator.hpp"
#include "seqcd/universal_code.hpp"

namespace seqcd {

namespace {

using Clock = std::chrono::steady_clock;

const Categorical kFair({0.5, 0.5});
const Categorical kSkewed({0.9, 0.1});

std::string fmt(double x, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

// Times `body`, which fills detail and returns the pass condition.
CriterionResult timed(std::string id, std::string name, std::string tolerance, double time_limit,
                      const std::function<bool(std::string&)>& body) {
  CriterionResult r{.id = std::move(id), .name = std::move(name), .tolerance = std::move(tolerance),
                    .time_limit = time_limit};
  const auto t0 = Clock::now();
  const bool ok = body(r.detail);
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  r.passed = ok && (time_limit <= 0.0 || r.seconds <= time_limit);
  if (ok && !r.passed) r.detail += "; exceeded time limit";
  return r;
}

MonteCarloOptions mc(const VerifyOptions& o, std::size_t trials, std::size_t horizon, std::uint64_t salt) {
  return MonteCarloOptions{.trials = trials, .seed = derive_seed(o.seed, salt), .horizon = horizon,
                           .threads = o.threads};
}

Categorical random_dist(std::size_t k, Rng& rng, double floor = 0.05) {
  std::vector<double> p(k);
  double sum = 0.0;
  for (auto& x : p) {
    x = floor + rng.uniform();
    sum += x;
  }
  for (auto& x : p) x /= sum;
  return Categorical(std::move(p));
}

// --- 1 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_kraft(const VerifyOptions&) {
  return {timed("1", "Kraft exactness of KT", "|kraft_sum - 1| <= 1e-9 for K in {2,3}, all n with K^n <= 2^16",
                10.0, [](std::string& detail) {
                  double worst = 0.0;
                  std::size_t cases = 0;
                  for (std::size_t k : {2u, 3u}) {
                    KTCoder kt(k);
                    std::uint64_t count = 1;
                    for (std::size_t n = 0; count <= (1u << 16); ++n, count *= k) {
                      worst = std::max(worst, std::abs(kraft_sum(kt, n) - 1.0));
                      ++cases;
                    }
                  }
                  detail = "cases=" + std::to_string(cases) + " max|sum-1|=" + fmt(worst);
                  return worst <= 1e-9;
                })};
}

// --- 2 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_redundancy(const VerifyOptions& o) {
  std::vector<CriterionResult> out;
  out.push_back(timed("2a", "exhaustive KT redundancy, K=2 n=12", "max(L + log2 mu) <= 0.5 log2 12 + 2 = 3.7925",
                      60.0, [](std::string& detail) {
                        const double r = redundancy(KTCoder(2), kFair, 12);
                        const double bound = 0.5 * std::log2(12.0) + 2.0;
                        detail = "redundancy=" + fmt(r) + " bits";
                        return r <= bound;
                      }));
  out.push_back(timed("2b", "sampled redundancy per symbol decreases",
                      "r(n)/n strictly decreasing over n in {64,256,1024,4096}, 5 seeds, mu=(0.9,0.1)", 60.0,
                      [&](std::string& detail) {
                        bool ok = true;
                        std::ostringstream os;
                        for (std::uint64_t s = 1; s <= 5; ++s) {
                          double prev = std::numeric_limits<double>::infinity();
                          os << "seed" << s << ":";
                          for (std::size_t n : {64u, 256u, 1024u, 4096u}) {
                            const RedundancyOptions ro{.mode = RedundancyMode::Sampled,
                                                       .samples = 64,
                                                       .seed = derive_seed(o.seed, 200 + s)};
                            const double per = redundancy(KTCoder(2), kSkewed, n, ro) / static_cast<double>(n);
                            os << ' ' << fmt(per, 4);
                            ok = ok && per < prev;
                            prev = per;
                          }
                          os << "; ";
                        }
                        detail = os.str();
                        return ok;
                      }));
  return out;
}

// --- 3 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_oracle(const VerifyOptions& o) {
  return {timed("3", "online statistic equals brute-force max over starts",
                "|online - brute| <= 1e-9 at every step; 100 streams x 200 symbols, K in {2,3,4}, all 3 modes", 60.0,
                [&](std::string& detail) {
                  Rng rng(derive_seed(o.seed, 3));
                  double worst = 0.0;
                  for (int stream = 0; stream < 100; ++stream) {
                    const std::size_t k = 2 + rng.next_u64() % 3;
                    const Categorical mu0 = random_dist(k, rng);
                    const Categorical mu1 = random_dist(k, rng);
                    std::vector<Symbol> prefix;
                    sample_iid(mu0, 50, rng, prefix);
                    for (Symbol s = 0; s < k; ++s) prefix.push_back(s);  // full support
                    const auto est = estimate_empirical(prefix, Alphabet(k));
                    std::vector<Symbol> ys(200);
                    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = (i < 100 ? mu0 : mu1).sample(rng);

                    const double lambda = 0.3 * rng.uniform();
                    const std::vector<DetectorConfig> configs = {
                        DetectorConfig::page(mu0, mu1, 1e12),
                        DetectorConfig::universal(DetectorMode::JBPage, mu0, lambda, 1e12),
                        DetectorConfig::universal(DetectorMode::Empirical, est.mu_hat(), lambda, 1e12)};
                    for (const auto& cfg : configs) {
                      Detector det(cfg);
                      for (std::size_t n = 1; n <= ys.size(); ++n) {
                        det.step(ys[n - 1]);
                        const double brute = brute_force_statistic(std::span(ys).first(n), cfg);
                        worst = std::max(worst, std::abs(det.statistic() - brute));
                      }
                    }
                  }
                  detail = "max abs diff=" + fmt(worst);
                  return worst <= 1e-9;
                })};
}

// --- 4 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_error_bound(const VerifyOptions& o) {
  std::vector<CriterionResult> out;
  out.push_back(timed("4a", "JB-Page false-stop probability",
                      "fraction <= alpha/(2^lambda - 1) = 0.02414 + 3 sigma; lambda=0.5 alpha=0.01 horizon=1e5, "
                      "2000 trials",
                      300.0, [&](std::string& detail) {
                        const auto res = estimate_error_prob(ErrorProbSetup{.mode = DetectorMode::JBPage,
                                                                            .mu0 = kFair,
                                                                            .lambda = 0.5,
                                                                            .alpha = 0.01,
                                                                            .mc = mc(o, 2000, 100000, 41)});
                        detail = "fraction=" + fmt(res.summary.false_alarm_fraction) + " bound=" + fmt(res.bound) +
                                 " sigma=" + fmt(res.sigma) + " censored=" + fmt(res.summary.censored_fraction);
                        return res.summary.false_alarm_fraction <= 0.02414 + 3.0 * res.sigma && res.pass;
                      }));
  out.push_back(timed("4b", "empirical-reference false-stop probability",
                      "fraction <= alpha/(2^(lambda - log2 beta) - 1) + eps0 + 3 sigma; n0=1e4 delta=0.02", 300.0,
                      [&](std::string& detail) {
                        const auto res = estimate_error_prob(ErrorProbSetup{.mode = DetectorMode::Empirical,
                                                                            .mu0 = kFair,
                                                                            .lambda = 0.5,
                                                                            .alpha = 0.01,
                                                                            .n0 = 10000,
                                                                            .delta = 0.02,
                                                                            .mc = mc(o, 2000, 100000, 42)});
                        detail = "fraction=" + fmt(res.summary.false_alarm_fraction) + " bound=" + fmt(res.bound) +
                                 " log2beta=" + fmt(res.log2_beta) + " eps0=" + fmt(res.epsilon0->used) + " (" +
                                 res.epsilon0->provenance + ", measured " + fmt(res.epsilon0->measured) +
                                 ") sigma=" + fmt(res.sigma);
                        return res.pass;
                      }));
  return out;
}

// --- 5 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_arl(const VerifyOptions& o) {
  std::vector<CriterionResult> out;
  out.push_back(timed("5a", "JB-Page ARL lower bound",
                      "censored mean stop time >= gamma (2^lambda - 1) = 3.3137; gamma=8 lambda=0.5 horizon=1e4, "
                      "1000 trials",
                      300.0, [&](std::string& detail) {
                        const auto res = estimate_arl0(ArlSetup{.mode = DetectorMode::JBPage,
                                                                .mu0 = kFair,
                                                                .lambda = 0.5,
                                                                .gamma = 8.0,
                                                                .mc = mc(o, 1000, 10000, 51)});
                        detail = "censored mean=" + fmt(res.summary.mean_stop_time) + " bound=" + fmt(res.bound) +
                                 " censored=" + fmt(res.summary.censored_fraction);
                        return res.pass && res.summary.mean_stop_time >= 3.3137;
                      }));
  out.push_back(timed("5b", "empirical-reference ARL lower bound",
                      "censored mean >= gamma / (1/(2^(lambda - log2 beta) - 1) + eps0 gamma); n0=1e4 delta=0.02",
                      300.0, [&](std::string& detail) {
                        const auto res = estimate_arl0(ArlSetup{.mode = DetectorMode::Empirical,
                                                                .mu0 = kFair,
                                                                .lambda = 0.5,
                                                                .gamma = 8.0,
                                                                .n0 = 10000,
                                                                .delta = 0.02,
                                                                .mc = mc(o, 1000, 10000, 52)});
                        detail = "censored mean=" + fmt(res.summary.mean_stop_time) + " bound=" + fmt(res.bound) +
                                 " eps0=" + fmt(res.epsilon0->used) + " (" + res.epsilon0->provenance + ")";
                        return res.pass;
                      }));
  return out;
}

// --- 6 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_slope(const VerifyOptions& o) {
  const std::vector<double> gammas = {16.0, 64.0, 256.0, 1024.0};
  std::vector<CriterionResult> out;
  out.push_back(timed("6a", "empirical-reference delay slope",
                      "|slope - 1/(D(mu1||mu_hat) - 0.2)| <= 25%; n0=1e5, gamma in {2^4..2^10}, 500 trials", 600.0,
                      [&](std::string& detail) {
                        const DelaySetup setup{.mode = DetectorMode::Empirical,
                                               .mu0 = kFair,
                                               .mu1 = kSkewed,
                                               .lambda = 0.2,
                                               .n0 = 100000,
                                               .mc = mc(o, 500, 0, 61)};
                        const auto res = delay_slope(setup, gammas);
                        detail = "slope=" + fmt(res.slope) + " predicted=" + fmt(res.predicted_slope) +
                                 " rel.err=" + fmt(res.relative_error, 3);
                        return res.relative_error <= 0.25;
                      }));
  out.push_back(timed("6b", "Page delay slope", "|slope - 1/D(mu1||mu0)| <= 15% (1/0.531 = 1.883)", 600.0,
                      [&](std::string& detail) {
                        const DelaySetup setup{.mode = DetectorMode::Page,
                                               .mu0 = kFair,
                                               .mu1 = kSkewed,
                                               .mc = mc(o, 500, 0, 62)};
                        const auto res = delay_slope(setup, gammas);
                        detail = "slope=" + fmt(res.slope) + " predicted=" + fmt(res.predicted_slope) +
                                 " rel.err=" + fmt(res.relative_error, 3);
                        return res.relative_error <= 0.15;
                      }));
  return out;
}

// --- 7 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_termination(const VerifyOptions& o) {
  auto run = [&](bool aux, std::string& detail) {
    DelaySetup setup{.mode = DetectorMode::Empirical,
                     .mu0 = kFair,
                     .mu1 = kSkewed,
                     .lambda = 0.2,
                     .threshold = 10.0,
                     .n0 = 100000,
                     .use_aux = aux,
                     .mc = mc(o, 1000, 0, aux ? 71 : 72)};
    DelaySetup probe_setup = setup;
    probe_setup.mc.trials = 1;
    const auto probe = estimate_worst_delay(probe_setup);
    setup.mc.horizon = static_cast<std::size_t>(std::ceil(100.0 * probe.predicted_delay));
    const auto res = estimate_worst_delay(setup);
    detail = "horizon=" + std::to_string(res.horizon) + " predicted=" + fmt(res.predicted_delay) +
             " censored=" + fmt(res.summary.censored_fraction) + " mean delay=" + fmt(res.summary.mean_delay);
    return res.summary.censored_fraction == 0.0 && res.trials.size() == 1000;
  };
  return {timed("7a", "N(alpha) terminates under mu1", "1000/1000 trials stop within 100x predicted delay", 300.0,
                [&](std::string& d) { return run(true, d); }),
          timed("7b", "M(gamma) terminates under mu1", "1000/1000 trials stop within 100x predicted delay", 300.0,
                [&](std::string& d) { return run(false, d); })};
}

// --- 8 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_log_ratio(const VerifyOptions& o) {
  return {timed("8", "empirical log-ratio bound",
                "f_n <= log2 beta and D(mu1||mu_hat) - D(mu1||mu0) < log2 beta on 1e4 pairs with the deviation "
                "event holding",
                60.0, [&](std::string& detail) {
                  Rng rng(derive_seed(o.seed, 8));
                  std::size_t pairs = 0;
                  std::size_t rejected = 0;
                  std::size_t fn_violations = 0;
                  std::size_t gap_violations = 0;
                  double max_fn_margin = -std::numeric_limits<double>::infinity();
                  std::vector<Symbol> prefix;
                  std::vector<Symbol> seq;
                  while (pairs < 10000) {
                    const std::size_t k = 2 + rng.next_u64() % 3;
                    const Categorical mu0 = random_dist(k, rng, 0.2);
                    const double p_min = mu0.min_positive_prob();
                    const double delta = p_min * (0.05 + 0.9 * rng.uniform());
                    const std::size_t n0 = 20 + rng.next_u64() % 2000;
                    sample_iid(mu0, n0, rng, prefix);
                    const auto est = estimate_empirical(prefix, Alphabet(k));
                    if (!check_deviation(est, mu0, delta).holds) {
                      ++rejected;
                      continue;
                    }
                    const Categorical source = random_dist(k, rng, 0.0);
                    sample_iid(source, 1 + rng.next_u64() % 300, rng, seq);
                    const double log2_beta = std::log2(beta_bound(mu0, delta));
                    const double fn = fn_statistic(mu0, est, seq);
                    max_fn_margin = std::max(max_fn_margin, fn - log2_beta);
                    if (!(fn <= log2_beta)) ++fn_violations;
                    const Categorical mu1 = random_dist(k, rng, 0.0);
                    const double gap = kl_divergence(mu1, est.mu_hat()) - kl_divergence(mu1, mu0);
                    if (!(gap < log2_beta)) ++gap_violations;
                    ++pairs;
                  }
                  detail = "pairs=" + std::to_string(pairs) + " rejected=" + std::to_string(rejected) +
                           " fn violations=" + std::to_string(fn_violations) +
                           " gap violations=" + std::to_string(gap_violations) +
                           " max(f_n - log2 beta)=" + fmt(max_fn_margin);
                  return fn_violations == 0 && gap_violations == 0;
                })};
}

// --- 9 ---------------------------------------------------------------------

std::vector<CriterionResult> suite_optimality(const VerifyOptions& o) {
  OptimalityReport r12;
  OptimalityReport r14;
  auto run = [&](double gamma) {
    return optimality_experiment(OptimalitySetup{.mu0 = kFair,
                                                 .mu1 = kSkewed,
                                                 .kappa = 0.5,
                                                 .gamma = gamma,
                                                 .n0_schedule = {100000},
                                                 .delta = 0.01,
                                                 .mc = mc(o, 500, 0, 91)});
  };
  std::vector<CriterionResult> out;
  out.push_back(timed("9a", "optimality ratio at gamma=2^12",
                      "mean delay / (log2 gamma / D(mu1||mu0)) in [1.2, 1.9]; kappa=0.5 n0=1e5 delta=0.01", 600.0,
                      [&](std::string& detail) {
                        r12 = run(4096.0);
                        const auto& row = r12.rows.front();
                        detail = "ratio=" + fmt(row.ratio) + " lambda=" + fmt(row.lambda) +
                                 " threshold=" + fmt(row.threshold) + " mean delay=" + fmt(row.mean_delay);
                        return row.feasible && row.ratio >= 1.2 && row.ratio <= 1.9;
                      }));
  out.push_back(timed("9b", "optimality ratio moves toward 1+kappa",
                      "|ratio(2^14) - 1.5| < |ratio(2^12) - 1.5|", 600.0, [&](std::string& detail) {
                        r14 = run(16384.0);
                        const double a = r12.rows.empty() ? 0.0 : r12.rows.front().ratio;
                        const double b = r14.rows.front().ratio;
                        detail = "ratio(2^12)=" + fmt(a) + " ratio(2^14)=" + fmt(b);
                        return std::abs(b - 1.5) < std::abs(a - 1.5);
                      }));
  return out;
}

// --- 10 --------------------------------------------------------------------

std::vector<CriterionResult> suite_reproducibility(const VerifyOptions& o) {
  return {timed("10", "seeded runs are byte-identical", "per-trial CSV identical across two runs with one seed", 120.0,
                [&](std::string& detail) {
                  auto csv_error = [&] {
                    std::ostringstream os;
                    const auto res = estimate_error_prob(ErrorProbSetup{.mode = DetectorMode::Empirical,
                                                                        .mu0 = kFair,
                                                                        .lambda = 0.5,
                                                                        .alpha = 0.05,
                                                                        .n0 = 1000,
                                                                        .delta = 0.05,
                                                                        .mc = mc(o, 200, 2000, 101)});
                    write_trials_csv(os, res.trials);
                    return os.str();
                  };
                  auto csv_delay = [&] {
                    std::ostringstream os;
                    const auto res = estimate_worst_delay(DelaySetup{.mode = DetectorMode::Empirical,
                                                                     .mu0 = kFair,
                                                                     .mu1 = kSkewed,
                                                                     .lambda = 0.2,
                                                                     .threshold = 8.0,
                                                                     .n0 = 5000,
                                                                     .change_point = 20,
                                                                     .mc = mc(o, 200, 0, 102)});
                    write_trials_csv(os, res.trials);
                    return os.str();
                  };
                  const bool same_error = csv_error() == csv_error();
                  const bool same_delay = csv_delay() == csv_delay();
                  detail = std::string("error-prob ") + (same_error ? "identical" : "DIFFERENT") + ", delay " +
                           (same_delay ? "identical" : "DIFFERENT");
                  return same_error && same_delay;
                })};
}

using Suite = std::vector<CriterionResult> (*)(const VerifyOptions&);

const std::map<std::string, Suite>& registry() {
  static const std::map<std::string, Suite> r = {
      {"kraft", suite_kraft},           {"redundancy", suite_redundancy},   {"oracle", suite_oracle},
      {"error-bound", suite_error_bound}, {"arl", suite_arl},              {"slope", suite_slope},
      {"termination", suite_termination}, {"log-ratio", suite_log_ratio},        {"optimality", suite_optimality},
      {"reproducibility", suite_reproducibility}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"kraft",       "redundancy", "oracle", "error-bound",
                                                 "arl",         "slope",      "termination", "log-ratio",
                                                 "optimality",  "reproducibility"};
  return names;
}

std::vector<CriterionResult> run_suite(const std::string& name, const VerifyOptions& opts) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) throw Error(ErrorCode::InvalidArgument, "unknown verify suite '" + name + "'");
  return it->second(opts);
}

void print_result(std::ostream& os, const CriterionResult& r) {
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " | " << r.tolerance << " | " << r.detail
     << " | " << std::fixed << std::setprecision(2) << r.seconds << " s";
  if (r.time_limit > 0.0) os << " (limit " << r.time_limit << " s)";
  os << std::defaultfloat << '\n';
}

}  // namespace seqcd
