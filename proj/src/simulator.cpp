#include "seqcd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace seqcd {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

template <typename Get>
Moments moments(std::span<const TrialResult> trials, Get get) {
  Moments m;
  if (trials.empty()) return m;
  // Welford in index order keeps the reduction deterministic.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (const auto& t : trials) {
    const double x = get(t);
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  m.mean = mean;
  m.var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return m;
}

// Drives a detector over freshly generated post-warm-up symbols.
template <typename Det>
TrialResult drive_trial(Det& det, ChangePointSource& source, Rng& rng, std::size_t horizon,
                        std::optional<std::size_t> m) {
  TrialResult r;
  r.change_point = m;
  bool alarm = false;
  try {
    while (det.n() < horizon) {
      if (det.step(source.next(rng))) break;
    }
    alarm = det.stopped();
    r.stop_time = alarm ? *det.stop_time() : horizon;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroReferenceProb) throw;
    // An unseen symbol drives the statistic to +inf.
    alarm = true;
    r.reference_defect = true;
    r.stop_time = det.n() + 1;
  }
  r.censored = !alarm;
  if (m) {
    r.false_alarm = alarm && r.stop_time < *m;
    r.delay = r.stop_time + 1 > *m ? r.stop_time + 1 - *m : 0;
  } else {
    r.false_alarm = alarm;
  }
  return r;
}

EmpiricalEstimate draw_estimate(const Categorical& mu0, std::size_t n0, Rng& rng) {
  std::vector<Symbol> prefix;
  sample_iid(mu0, n0, rng, prefix);
  return estimate_empirical(prefix, mu0.alphabet());
}

Epsilon0 make_epsilon0(std::span<const TrialResult> trials, std::size_t k, std::size_t n0, double delta) {
  Epsilon0 e;
  e.hoeffding = hoeffding_epsilon0(k, n0, delta);
  const auto failures = static_cast<double>(std::count_if(
      trials.begin(), trials.end(), [](const TrialResult& t) { return t.deviation_held && !*t.deviation_held; }));
  const auto n = static_cast<double>(trials.size());
  if (n > 0) {
    e.measured = failures / n;
    e.measured_upper = failures > 0 ? std::min(1.0, e.measured + 3.0 * std::sqrt(e.measured * (1 - e.measured) / n))
                                    : std::min(1.0, 3.0 / n);
  }
  if (e.measured_upper < e.hoeffding) {
    e.used = e.measured_upper;
    e.provenance = "monte-carlo";
  } else {
    e.used = e.hoeffding;
    e.provenance = "hoeffding";
  }
  return e;
}

std::size_t ceil_to_size(double x) {
  return static_cast<std::size_t>(std::ceil(std::max(x, 1.0)));
}

}  // namespace

SymbolStream gen_stream(const StreamSpec& spec) {
  if (spec.mu0.size() != spec.mu1.size()) throw Error(ErrorCode::InvalidArgument, "mu0 and mu1 alphabets differ");
  if (spec.change_point && (*spec.change_point == 0 || *spec.change_point > spec.horizon)) {
    throw Error(ErrorCode::InvalidArgument, "change point must lie in [1, horizon]");
  }
  Rng rng(spec.seed);
  SymbolStream out;
  out.alphabet_size = spec.mu0.size();
  out.change_point = spec.change_point;
  out.prefix_length = spec.n0;
  out.symbols.reserve(spec.n0 + spec.horizon);
  for (std::size_t i = 0; i < spec.n0; ++i) out.symbols.push_back(spec.mu0.sample(rng));
  ChangePointSource source(spec.mu0, spec.mu1, spec.change_point);
  for (std::size_t i = 0; i < spec.horizon; ++i) out.symbols.push_back(source.next(rng));
  return out;
}

ExperimentSummary summarize(std::span<const TrialResult> trials) {
  ExperimentSummary s;
  s.trials = trials.size();
  if (trials.empty()) return s;
  const auto n = static_cast<double>(trials.size());

  const auto stop = moments(trials, [](const TrialResult& t) { return static_cast<double>(t.stop_time); });
  s.mean_stop_time = stop.mean;
  s.var_stop_time = stop.var;
  s.stop_time_half_width = kZ95 * std::sqrt(stop.var / n);

  const auto delay = moments(trials, [](const TrialResult& t) { return static_cast<double>(t.delay); });
  s.mean_delay = delay.mean;
  s.var_delay = delay.var;
  s.delay_half_width = kZ95 * std::sqrt(delay.var / n);

  const auto fa = static_cast<double>(std::count_if(trials.begin(), trials.end(), [](auto& t) { return t.false_alarm; }));
  s.false_alarm_fraction = fa / n;
  s.false_alarm_half_width = kZ95 * std::sqrt(s.false_alarm_fraction * (1 - s.false_alarm_fraction) / n);
  s.censored_fraction =
      static_cast<double>(std::count_if(trials.begin(), trials.end(), [](auto& t) { return t.censored; })) / n;
  s.reference_defects = static_cast<std::size_t>(
      std::count_if(trials.begin(), trials.end(), [](auto& t) { return t.reference_defect; }));
  return s;
}

// ---------------------------------------------------------------------------
// Error probability

double jb_error_bound(double alpha, double lambda) {
  return lambda > 0.0 ? alpha / (std::exp2(lambda) - 1.0) : kInf;
}

double empirical_error_bound(double alpha, double lambda, double log2_beta, double eps0) {
  const double margin = lambda - log2_beta;
  return margin > 0.0 ? alpha / (std::exp2(margin) - 1.0) + eps0 : kInf;
}

ErrorProbResult estimate_error_prob(const ErrorProbSetup& setup) {
  if (setup.mode == DetectorMode::Page) {
    throw Error(ErrorCode::InvalidArgument, "error-probability experiment covers jbpage and empirical modes");
  }
  const bool empirical = setup.mode == DetectorMode::Empirical;
  if (empirical && setup.n0 == 0) throw Error(ErrorCode::EmptyPrefix, "empirical mode needs n0 > 0");

  ErrorProbResult res;
  res.threshold = threshold_from_alpha(setup.alpha);
  const std::size_t horizon = setup.mc.horizon != 0 ? setup.mc.horizon : 100000;
  if (empirical) res.log2_beta = std::log2(beta_bound(setup.mu0, setup.delta));

  const DetectorConfig base = DetectorConfig::universal(setup.mode, setup.mu0, setup.lambda, res.threshold);
  res.trials = run_trials(setup.mc, [&](std::size_t i) {
    Rng rng = substream(setup.mc.seed, i);
    DetectorConfig cfg = base;
    std::optional<bool> held;
    if (empirical) {
      const auto est = draw_estimate(setup.mu0, setup.n0, rng);
      held = check_deviation(est, setup.mu0, setup.delta).holds;
      cfg.reference = est.reference(setup.smoothing);
    }
    AuxDetector det(std::move(cfg));
    ChangePointSource source(setup.mu0, setup.mu0, std::nullopt);
    TrialResult r = drive_trial(det, source, rng, horizon, std::nullopt);
    r.trial = i;
    r.seed = rng.seed();
    r.deviation_held = held;
    return r;
  });
  res.summary = summarize(res.trials);

  if (empirical) {
    res.epsilon0 = make_epsilon0(res.trials, setup.mu0.size(), setup.n0, setup.delta);
    res.bound = empirical_error_bound(setup.alpha, setup.lambda, res.log2_beta, res.epsilon0->used);
  } else {
    res.bound = jb_error_bound(setup.alpha, setup.lambda);
  }
  const double b = std::min(res.bound, 1.0);
  res.sigma = std::sqrt(b * (1.0 - b) / static_cast<double>(std::max<std::size_t>(res.trials.size(), 1)));
  res.pass = res.summary.false_alarm_fraction <= res.bound + 3.0 * res.sigma;
  return res;
}

// ---------------------------------------------------------------------------
// ARL

double jb_arl_bound(double gamma, double lambda) { return gamma * (std::exp2(lambda) - 1.0); }

double empirical_arl_bound(double gamma, double lambda, double log2_beta, double eps0) {
  const double margin = lambda - log2_beta;
  if (margin <= 0.0) return 0.0;
  return gamma / (1.0 / (std::exp2(margin) - 1.0) + eps0 * gamma);
}

ArlResult estimate_arl0(const ArlSetup& setup) {
  const bool empirical = setup.mode == DetectorMode::Empirical;
  if (empirical && setup.n0 == 0) throw Error(ErrorCode::EmptyPrefix, "empirical mode needs n0 > 0");
  if (setup.mode == DetectorMode::Page && !setup.mu1) {
    throw Error(ErrorCode::InvalidArgument, "Page mode needs mu1");
  }

  ArlResult res;
  const double threshold = threshold_from_gamma(setup.gamma);
  res.horizon = setup.mc.horizon != 0 ? setup.mc.horizon : ceil_to_size(20.0 * setup.gamma);
  if (empirical) res.log2_beta = std::log2(beta_bound(setup.mu0, setup.delta));

  DetectorConfig base = setup.mode == DetectorMode::Page
                            ? DetectorConfig::page(setup.mu0, *setup.mu1, threshold)
                            : DetectorConfig::universal(setup.mode, setup.mu0, setup.lambda, threshold);
  base.penalty = setup.penalty;
  base.max_starts = setup.max_starts;

  res.trials = run_trials(setup.mc, [&](std::size_t i) {
    Rng rng = substream(setup.mc.seed, i);
    DetectorConfig cfg = base;
    std::optional<bool> held;
    if (empirical) {
      const auto est = draw_estimate(setup.mu0, setup.n0, rng);
      held = check_deviation(est, setup.mu0, setup.delta).holds;
      cfg.reference = est.reference(setup.smoothing);
    }
    Detector det(std::move(cfg));
    ChangePointSource source(setup.mu0, setup.mu0, std::nullopt);
    TrialResult r = drive_trial(det, source, rng, res.horizon, std::nullopt);
    r.trial = i;
    r.seed = rng.seed();
    r.deviation_held = held;
    return r;
  });
  res.summary = summarize(res.trials);

  switch (setup.mode) {
    case DetectorMode::Page:
      res.bound = setup.gamma;
      break;
    case DetectorMode::JBPage:
      res.bound = jb_arl_bound(setup.gamma, setup.lambda);
      break;
    case DetectorMode::Empirical:
      res.epsilon0 = make_epsilon0(res.trials, setup.mu0.size(), setup.n0, setup.delta);
      res.bound = empirical_arl_bound(setup.gamma, setup.lambda, res.log2_beta, res.epsilon0->used);
      break;
  }
  res.pass = res.summary.censored_fraction < 1.0 ? res.summary.mean_stop_time >= res.bound
                                                  : static_cast<double>(res.horizon) >= res.bound;
  return res;
}

// ---------------------------------------------------------------------------
// Delay

namespace {

DelayResult run_delay(const DelaySetup& setup, const std::optional<EmpiricalEstimate>& fixed_estimate) {
  const bool empirical = setup.mode == DetectorMode::Empirical;
  if (setup.change_point == 0) throw Error(ErrorCode::InvalidArgument, "change point is 1-based");
  if (empirical && setup.n0 == 0) throw Error(ErrorCode::EmptyPrefix, "empirical mode needs n0 > 0");

  DelayResult res;
  const Categorical* drift_ref = &setup.mu0;
  if (fixed_estimate) {
    res.warmup_counts = fixed_estimate->counts();
    drift_ref = &fixed_estimate->mu_hat();
  }
  if (setup.mode == DetectorMode::Page) {
    res.drift = kl_divergence(setup.mu1, setup.mu0);
  } else {
    try {
      res.drift = kl_divergence(setup.mu1, *drift_ref) - setup.lambda;
    } catch (const Error&) {
      res.drift = kInf;  // mu1 reaches a symbol the reference never produced
    }
  }
  res.predicted_delay = res.drift > 0.0 ? setup.threshold / res.drift : kInf;
  if (setup.mc.horizon != 0) {
    res.horizon = setup.mc.horizon;
  } else {
    if (!std::isfinite(res.predicted_delay)) {
      throw Error(ErrorCode::InvalidArgument, "no positive upward drift; set an explicit horizon");
    }
    res.horizon = setup.change_point - 1 + ceil_to_size(50.0 * res.predicted_delay);
  }

  DetectorConfig base = setup.mode == DetectorMode::Page
                            ? DetectorConfig::page(setup.mu0, setup.mu1, setup.threshold)
                            : DetectorConfig::universal(setup.mode, setup.mu0, setup.lambda, setup.threshold);
  base.penalty = setup.penalty;
  base.max_starts = setup.max_starts;
  if (fixed_estimate) base.reference = fixed_estimate->reference(setup.smoothing);

  const std::optional<std::size_t> m = setup.change_point;
  res.trials = run_trials(setup.mc, [&](std::size_t i) {
    Rng rng = substream(setup.mc.seed, i);
    DetectorConfig cfg = base;
    if (empirical && !fixed_estimate) cfg.reference = draw_estimate(setup.mu0, setup.n0, rng).reference(setup.smoothing);
    ChangePointSource source(setup.mu0, setup.mu1, m);
    TrialResult r;
    if (setup.use_aux) {
      AuxDetector det(std::move(cfg));
      r = drive_trial(det, source, rng, res.horizon, m);
    } else {
      Detector det(std::move(cfg));
      r = drive_trial(det, source, rng, res.horizon, m);
    }
    r.trial = i;
    r.seed = rng.seed();
    return r;
  });
  res.summary = summarize(res.trials);
  return res;
}

std::optional<EmpiricalEstimate> conditional_estimate(const DelaySetup& setup) {
  if (setup.mode != DetectorMode::Empirical || setup.redraw_warmup) return std::nullopt;
  Rng rng = substream(setup.mc.seed, kWarmupStream);
  return draw_estimate(setup.mu0, setup.n0, rng);
}

}  // namespace

DelayResult estimate_worst_delay(const DelaySetup& setup) { return run_delay(setup, conditional_estimate(setup)); }

SlopeResult delay_slope(const DelaySetup& setup, std::span<const double> gammas) {
  if (gammas.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two gamma values");
  SlopeResult res;
  const auto estimate = conditional_estimate(setup);
  for (double g : gammas) {
    DelaySetup point = setup;
    point.threshold = threshold_from_gamma(g);
    res.points.push_back(run_delay(point, estimate));
    res.log2_gammas.push_back(point.threshold);
    res.mean_delays.push_back(res.points.back().summary.mean_delay);
  }

  const auto n = static_cast<double>(gammas.size());
  const double mx = std::accumulate(res.log2_gammas.begin(), res.log2_gammas.end(), 0.0) / n;
  const double my = std::accumulate(res.mean_delays.begin(), res.mean_delays.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    sxx += (res.log2_gammas[i] - mx) * (res.log2_gammas[i] - mx);
    sxy += (res.log2_gammas[i] - mx) * (res.mean_delays[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "gamma values must differ");
  res.slope = sxy / sxx;
  res.intercept = my - res.slope * mx;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    res.residuals.push_back(res.mean_delays[i] - (res.intercept + res.slope * res.log2_gammas[i]));
  }
  const double drift = res.points.front().drift;
  res.predicted_slope = drift > 0.0 ? 1.0 / drift : kInf;
  res.relative_error = std::abs(res.slope - res.predicted_slope) / res.predicted_slope;
  return res;
}

// ---------------------------------------------------------------------------
// Optimality

double kappa_lambda(const Categorical& mu0, const Categorical& mu1, const Categorical& mu_hat, double kappa) {
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa must be > 0");
  return kl_divergence(mu1, mu_hat) - kl_divergence(mu1, mu0) / (1.0 + kappa);
}

double eta_threshold(double gamma, double lambda, double log2_beta) {
  const double margin = lambda - log2_beta;
  if (!(margin > 0.0)) {
    throw Error(ErrorCode::InfeasibleKappa, "lambda(kappa) does not exceed log2 beta");
  }
  return std::log2(gamma) + std::log2(1.0 / (std::exp2(margin) - 1.0) + 1.0);
}

OptimalityReport optimality_experiment(const OptimalitySetup& setup) {
  if (setup.n0_schedule.empty()) throw Error(ErrorCode::InvalidArgument, "n0 schedule is empty");
  OptimalityReport report;
  report.d_mu1_mu0 = kl_divergence(setup.mu1, setup.mu0);
  report.lorden_delay = threshold_from_gamma(setup.gamma) / report.d_mu1_mu0;
  const double log2_beta = std::log2(beta_bound(setup.mu0, setup.delta));

  // Nested warm-ups: every n0 uses a prefix of one shared draw.
  const std::size_t max_n0 = *std::max_element(setup.n0_schedule.begin(), setup.n0_schedule.end());
  Rng warm_rng = substream(setup.mc.seed, kWarmupStream);
  std::vector<Symbol> warmup;
  sample_iid(setup.mu0, max_n0, warm_rng, warmup);

  bool any_feasible = false;
  for (std::size_t n0 : setup.n0_schedule) {
    OptimalityRow row;
    row.n0 = n0;
    row.log2_beta = log2_beta;
    if (n0 == 0) throw Error(ErrorCode::EmptyPrefix, "n0 must be > 0");
    const auto est = estimate_empirical(std::span(warmup).first(n0), setup.mu0.alphabet());
    if (!est.full_support()) {
      row.reason = "warm-up misses a symbol";
      report.rows.push_back(row);
      continue;
    }
    row.d_mu0_hat = kl_divergence(setup.mu0, est.mu_hat());
    row.d_mu1_hat = kl_divergence(setup.mu1, est.mu_hat());
    row.lambda = kappa_lambda(setup.mu0, setup.mu1, est.mu_hat(), setup.kappa);
    const double lo = std::max(log2_beta, row.d_mu0_hat);
    if (!(row.lambda > lo && row.lambda < row.d_mu1_hat)) {
      std::ostringstream os;
      os << "lambda " << row.lambda << " outside (" << lo << ", " << row.d_mu1_hat << ")";
      row.reason = os.str();
      report.rows.push_back(row);
      continue;
    }
    row.feasible = true;
    any_feasible = true;
    row.threshold = eta_threshold(setup.gamma, row.lambda, log2_beta);
    row.drift_warning = row.d_mu1_hat - row.lambda < 0.05 * report.d_mu1_mu0;

    DelaySetup ds{.mode = DetectorMode::Empirical,
                  .mu0 = setup.mu0,
                  .mu1 = setup.mu1,
                  .lambda = row.lambda,
                  .threshold = row.threshold,
                  .n0 = n0,
                  .change_point = 1,
                  .mc = setup.mc};
    const auto delay = run_delay(ds, est);
    row.predicted_delay = delay.predicted_delay;
    row.mean_delay = delay.summary.mean_delay;
    row.delay_half_width = delay.summary.delay_half_width;
    row.censored_fraction = delay.summary.censored_fraction;
    row.ratio = row.mean_delay / report.lorden_delay;
    report.rows.push_back(row);
  }
  if (!any_feasible) {
    throw Error(ErrorCode::InfeasibleKappa, "lambda(kappa) is outside the validity window for every n0");
  }
  return report;
}

// ---------------------------------------------------------------------------

void write_trials_csv(std::ostream& os, std::span<const TrialResult> trials) {
  os << "trial,seed,m,stop_time,delay,false_alarm,censored\n";
  for (const auto& t : trials) {
    os << t.trial << ',' << t.seed << ',';
    if (t.change_point) {
      os << *t.change_point;
    } else {
      os << "inf";
    }
    os << ',' << t.stop_time << ',' << t.delay << ',' << (t.false_alarm ? 1 : 0) << ',' << (t.censored ? 1 : 0)
       << '\n';
  }
}

}  // namespace seqcd
