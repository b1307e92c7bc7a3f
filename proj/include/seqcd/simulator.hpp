#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "seqcd/alphabet_dist.hpp"
#include "seqcd/detectors.hpp"
#include "seqcd/empirical.hpp"

namespace seqcd {

// Substream index reserved for the shared warm-up draw of conditional experiments.
inline constexpr std::uint64_t kWarmupStream = std::uint64_t{1} << 62;

struct StreamSpec {
  Categorical mu0;
  Categorical mu1;
  std::size_t n0 = 0;
  // 1-based position of the first post-change symbol after warm-up; unset means no change.
  std::optional<std::size_t> change_point;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
};

// Post-warm-up symbols: indices i < m from mu0, i >= m from mu1.
class ChangePointSource {
 public:
  ChangePointSource(const Categorical& mu0, const Categorical& mu1, std::optional<std::size_t> change_point)
      : mu0_(&mu0), mu1_(&mu1), m_(change_point) {}

  Symbol next(Rng& rng) {
    ++i_;
    return (m_ && i_ >= *m_) ? mu1_->sample(rng) : mu0_->sample(rng);
  }

 private:
  const Categorical* mu0_;
  const Categorical* mu1_;
  std::optional<std::size_t> m_;
  std::size_t i_ = 0;
};

// n0 warm-up symbols from mu0 followed by `horizon` post-warm-up symbols.
SymbolStream gen_stream(const StreamSpec& spec);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> change_point;
  std::size_t stop_time = 0;  // equals the horizon when censored
  std::size_t delay = 0;      // (stop_time - m + 1)^+, 0 without a change point
  bool false_alarm = false;
  bool censored = false;
  // Empirical mode: a symbol unseen in the warm-up arrived; treated as an alarm.
  bool reference_defect = false;
  // Empirical mode: whether the deviation event held for this trial's warm-up.
  std::optional<bool> deviation_held;
};

struct ExperimentSummary {
  std::size_t trials = 0;
  double mean_stop_time = 0.0;  // censored trials contribute the horizon
  double var_stop_time = 0.0;
  double stop_time_half_width = 0.0;
  double mean_delay = 0.0;
  double var_delay = 0.0;
  double delay_half_width = 0.0;
  double false_alarm_fraction = 0.0;
  double false_alarm_half_width = 0.0;
  double censored_fraction = 0.0;
  std::size_t reference_defects = 0;
};

// Normal-approximation 95% half-widths.
ExperimentSummary summarize(std::span<const TrialResult> trials);

// Common knobs of every Monte Carlo experiment.
struct MonteCarloOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::size_t horizon = 0;  // 0 selects the experiment's default
  unsigned threads = 0;     // 0 selects hardware concurrency
};

// --- error probability -----------------------------------------------------

struct ErrorProbSetup {
  DetectorMode mode = DetectorMode::JBPage;  // JBPage or Empirical
  Categorical mu0;
  double lambda = 0.5;
  double alpha = 0.01;
  std::size_t n0 = 0;  // Empirical only; warm-up redrawn every trial
  double delta = 0.0;  // Empirical only
  Smoothing smoothing = Smoothing::None;
  MonteCarloOptions mc;
};

struct Epsilon0 {
  double hoeffding = 1.0;
  double measured = 0.0;        // fraction of trials whose warm-up failed the deviation event
  double measured_upper = 1.0;  // measured + 3 sigma, or 3/trials with no failures
  double used = 1.0;
  std::string provenance;       // "hoeffding" or "monte-carlo"
};

struct ErrorProbResult {
  std::vector<TrialResult> trials;
  ExperimentSummary summary;
  double threshold = 0.0;  // -log2 alpha
  double log2_beta = 0.0;
  std::optional<Epsilon0> epsilon0;
  double bound = 0.0;
  double sigma = 0.0;  // binomial sd at the bound
  bool pass = false;   // false-stop fraction <= bound + 3 sigma
};

ErrorProbResult estimate_error_prob(const ErrorProbSetup& setup);

// alpha / (2^lambda - 1); +inf when lambda <= 0.
double jb_error_bound(double alpha, double lambda);
// alpha / (2^(lambda - log2 beta) - 1) + eps0; +inf when lambda <= log2 beta.
double empirical_error_bound(double alpha, double lambda, double log2_beta, double eps0);

// --- ARL to false alarm ----------------------------------------------------

struct ArlSetup {
  DetectorMode mode = DetectorMode::JBPage;
  Categorical mu0;
  std::optional<Categorical> mu1;  // Page only
  double lambda = 0.5;
  double gamma = 8.0;
  std::size_t n0 = 0;
  double delta = 0.0;
  Smoothing smoothing = Smoothing::None;
  PenaltyMode penalty = PenaltyMode::WindowLength;
  std::optional<std::size_t> max_starts;
  MonteCarloOptions mc;  // horizon default 20 * gamma
};

struct ArlResult {
  std::vector<TrialResult> trials;
  ExperimentSummary summary;
  std::size_t horizon = 0;
  double log2_beta = 0.0;
  std::optional<Epsilon0> epsilon0;
  double bound = 0.0;
  bool pass = false;  // censored mean >= bound
};

ArlResult estimate_arl0(const ArlSetup& setup);

// gamma (2^lambda - 1).
double jb_arl_bound(double gamma, double lambda);
// gamma / (1 / (2^(lambda - log2 beta) - 1) + eps0 gamma); 0 when lambda <= log2 beta.
double empirical_arl_bound(double gamma, double lambda, double log2_beta, double eps0);

// --- detection delay -------------------------------------------------------

struct DelaySetup {
  DetectorMode mode = DetectorMode::Empirical;
  Categorical mu0;
  Categorical mu1;
  double lambda = 0.2;
  double threshold = 10.0;  // bits, log2 gamma
  std::size_t n0 = 0;
  std::size_t change_point = 1;
  Smoothing smoothing = Smoothing::None;
  PenaltyMode penalty = PenaltyMode::WindowLength;
  std::optional<std::size_t> max_starts;
  bool redraw_warmup = false;  // unconditional estimate
  bool use_aux = false;        // single-start N(alpha) instead of the max over starts
  MonteCarloOptions mc;        // horizon default 50 * predicted delay
};

struct DelayResult {
  std::vector<TrialResult> trials;
  ExperimentSummary summary;
  std::size_t horizon = 0;
  std::optional<std::vector<std::uint64_t>> warmup_counts;  // conditional runs only
  double drift = 0.0;  // D(mu1 || ref) - lambda, or D(mu1 || mu0) for Page
  double predicted_delay = 0.0;
};

DelayResult estimate_worst_delay(const DelaySetup& setup);

struct SlopeResult {
  std::vector<double> log2_gammas;
  std::vector<double> mean_delays;
  std::vector<double> residuals;
  std::vector<DelayResult> points;
  double slope = 0.0;
  double intercept = 0.0;
  double predicted_slope = 0.0;
  double relative_error = 0.0;
};

// Least-squares slope of mean delay against log2 gamma. Every gamma reuses the
// template's seed (common random numbers).
SlopeResult delay_slope(const DelaySetup& setup, std::span<const double> gammas);

// --- optimality construction -----------------------------------------------

struct OptimalitySetup {
  Categorical mu0;
  Categorical mu1;
  double kappa = 0.5;
  double gamma = 4096.0;
  std::vector<std::size_t> n0_schedule;
  double delta = 0.01;
  MonteCarloOptions mc;
};

struct OptimalityRow {
  std::size_t n0 = 0;
  bool feasible = false;
  std::string reason;
  double lambda = 0.0;
  double log2_beta = 0.0;
  double d_mu0_hat = 0.0;
  double d_mu1_hat = 0.0;
  double threshold = 0.0;  // log2 eta
  double predicted_delay = 0.0;
  double mean_delay = 0.0;
  double delay_half_width = 0.0;
  double censored_fraction = 0.0;
  double ratio = 0.0;  // mean_delay / (log2 gamma / D(mu1 || mu0))
  bool drift_warning = false;
};

struct OptimalityReport {
  double d_mu1_mu0 = 0.0;
  double lorden_delay = 0.0;  // log2 gamma / D(mu1 || mu0)
  std::vector<OptimalityRow> rows;
};

// lambda(kappa) = D(mu1 || mu_hat) - D(mu1 || mu0) / (1 + kappa).
double kappa_lambda(const Categorical& mu0, const Categorical& mu1, const Categorical& mu_hat, double kappa);
// log2 of gamma (1 / (2^(lambda - log2 beta) - 1) + 1). Throws InfeasibleKappa when lambda <= log2 beta.
double eta_threshold(double gamma, double lambda, double log2_beta);

// Throws InfeasibleKappa when no schedule entry is feasible.
OptimalityReport optimality_experiment(const OptimalitySetup& setup);

// --- output ----------------------------------------------------------------

// Header row plus one row per trial: trial,seed,m,stop_time,delay,false_alarm,censored.
void write_trials_csv(std::ostream& os, std::span<const TrialResult> trials);

// Fans trial indices over worker threads; results land by index.
template <typename Fn>
std::vector<TrialResult> run_trials(const MonteCarloOptions& mc, Fn&& trial_fn);

}  // namespace seqcd

#include "seqcd/detail/run_trials.hpp"
