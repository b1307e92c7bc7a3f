#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqcd/alphabet_dist.hpp"
#include "seqcd/empirical.hpp"
#include "seqcd/error.hpp"
#include "seqcd/universal_code.hpp"

namespace seqcd {

enum class DetectorMode {
  Page,       // known pre- and post-change distributions
  JBPage,     // known pre-change, KT code for the post-change side
  Empirical,  // empirical pre-change estimate, KT code for the post-change side
};

enum class PenaltyMode {
  WindowLength,  // start k at time n pays (n-k+1) * lambda
  AbsoluteN,     // every start pays n * lambda
};

std::string to_string(DetectorMode mode);
std::string to_string(PenaltyMode mode);
DetectorMode parse_detector_mode(const std::string& s);
PenaltyMode parse_penalty_mode(const std::string& s);

// log2(gamma); requires gamma > 1.
double threshold_from_gamma(double gamma);
// -log2(alpha); requires 0 < alpha < 1.
double threshold_from_alpha(double alpha);

struct DetectorConfig {
  DetectorMode mode = DetectorMode::JBPage;
  double lambda = 0.0;     // bits per symbol, ignored in Page mode
  double threshold = 1.0;  // bits
  Categorical reference;   // mu0, or the (possibly smoothed) empirical estimate
  std::optional<Categorical> post;  // mu1, Page mode only
  PenaltyMode penalty = PenaltyMode::WindowLength;
  // Candidate-start cap. Unset keeps every start (exact).
  std::optional<std::size_t> max_starts;
  // Starts more than this far below the best are eligible for pruning. Unset: 2 * threshold.
  std::optional<double> prune_slack;

  static DetectorConfig page(Categorical mu0, Categorical mu1, double threshold);
  static DetectorConfig universal(DetectorMode mode, Categorical reference, double lambda, double threshold);
};

/**
 * Online CUSUM-type detector.
 *
 * Page mode runs the classic recursion W_n = max(0, W_{n-1} + llr_n); the
 * reported statistic is W_{n-1} + llr_n, which equals
 * max_k sum_{i=k..n} llr_i exactly.
 *
 * Universal modes keep one KT state per candidate start k and report
 * max_k ( -L(y_k..n) - log2 ref(y_k..n) - penalty(k, n) ).
 *
 * The detector alarms the first time the statistic is >= threshold; later
 * calls to step() are ignored.
 */
class Detector {
 public:
  explicit Detector(DetectorConfig config);

  // Processes one symbol. Returns true once stopped.
  bool step(Symbol s);

  std::size_t n() const noexcept { return n_; }
  double statistic() const noexcept { return statistic_; }
  bool stopped() const noexcept { return stop_time_.has_value(); }
  std::optional<std::size_t> stop_time() const noexcept { return stop_time_; }
  std::size_t active_starts() const noexcept { return starts_.size(); }
  const DetectorConfig& config() const noexcept { return config_; }

 private:
  void step_page(Symbol s);
  void step_universal(Symbol s);
  void prune();

  DetectorConfig config_;
  std::size_t k_;
  std::size_t n_ = 0;
  double statistic_;
  std::optional<std::size_t> stop_time_;

  // Page
  double cusum_ = 0.0;
  std::vector<double> llr_;

  // Universal: start k has score_ = -L_k - C_{k-1} (+ lambda (k-1) in window mode),
  // so its statistic is score_ + C_n - lambda n.
  std::vector<double> neg_log_ref_;
  double cum_neg_log_ref_ = 0.0;
  std::vector<std::uint64_t> starts_;
  std::vector<double> score_;
  std::vector<std::uint32_t> counts_;  // K per start, same order as starts_
  KtLogTable log_table_;
};

// One-start first-passage test, alarms at the first n with statistic >= threshold.
class AuxDetector {
 public:
  explicit AuxDetector(DetectorConfig config);

  bool step(Symbol s);

  std::size_t n() const noexcept { return n_; }
  double statistic() const noexcept { return statistic_; }
  bool stopped() const noexcept { return stop_time_.has_value(); }
  std::optional<std::size_t> stop_time() const noexcept { return stop_time_; }

 private:
  DetectorConfig config_;
  std::size_t n_ = 0;
  double statistic_ = 0.0;
  double sum_ = 0.0;  // llr sum (Page) or -log2 ref sum
  std::optional<std::size_t> stop_time_;
  std::vector<std::uint32_t> counts_;
  double kt_bits_ = 0.0;
  KtLogTable log_table_;
};

struct StopReport {
  bool stopped = false;
  std::size_t stop_time = 0;  // post-warm-up samples; samples processed when not stopped
  double final_statistic = 0.0;
  std::vector<double> trace;  // statistic after every step, when requested
};

StopReport run_detector(const DetectorConfig& config, std::span<const Symbol> stream, bool keep_trace = false);

// Auxiliary stopping time N(alpha) / N0(alpha): config.threshold should be -log2(alpha).
StopReport aux_stop(std::span<const Symbol> stream, const DetectorConfig& config, bool keep_trace = false);

// Direct O(n^2) evaluation of the max over starts after the whole prefix.
// Page mode returns max_k sum_{i=k..n} llr_i. Test oracle; n is capped at 10^4.
double brute_force_statistic(std::span<const Symbol> prefix, const DetectorConfig& config);

class LambdaWindowError : public Error {
 public:
  LambdaWindowError(ErrorCode code, const std::string& what, LambdaWindow window)
      : Error(code, what), window_(window) {}
  const LambdaWindow& window() const noexcept { return window_; }

 private:
  LambdaWindow window_;
};

struct ValidationReport {
  std::optional<LambdaWindow> window;
  std::vector<std::string> warnings;
};

struct ValidationInputs {
  std::optional<Categorical> mu0;
  std::optional<Categorical> mu1;
  std::optional<EmpiricalEstimate> estimate;
  double delta = 0.0;
};

// Checks threshold > 0 and, where enough is known, that lambda lies inside the
// validity window. Throws EmptyWindow / LambdaOutsideWindow (as
// LambdaWindowError) or ValidationError; missing inputs produce warnings.
ValidationReport validate_config(const DetectorConfig& config, const ValidationInputs& inputs);

}  // namespace seqcd
