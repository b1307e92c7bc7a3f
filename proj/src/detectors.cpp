#include "seqcd/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace seqcd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBruteForceLimit = 10000;

// log2(mu1(s)/mu0(s)) with the +-inf conventions of the Page test.
double page_llr(const Categorical& mu0, const Categorical& mu1, Symbol s) {
  const bool in0 = mu0.in_support(s);
  const bool in1 = mu1.in_support(s);
  if (!in0 && !in1) {
    throw Error(ErrorCode::SupportMismatch, "symbol " + std::to_string(s) + " has zero probability under mu0 and mu1");
  }
  if (!in0) return kInf;
  if (!in1) return -kInf;
  return mu1.log2_prob(s) - mu0.log2_prob(s);
}

double neg_log_ref(const Categorical& ref, Symbol s) {
  if (!ref.in_support(s)) {
    throw Error(ErrorCode::ZeroReferenceProb,
                "symbol " + std::to_string(s) + " has zero probability under the reference distribution");
  }
  return -ref.log2_prob(s);
}

void check_config(const DetectorConfig& c) {
  if (!(c.threshold > 0.0) || std::isnan(c.threshold)) {
    throw Error(ErrorCode::ValidationError, "threshold must be > 0 bits (gamma > 1)");
  }
  if (c.mode == DetectorMode::Page) {
    if (!c.post) throw Error(ErrorCode::ValidationError, "Page mode requires a post-change distribution");
    if (c.post->size() != c.reference.size()) {
      throw Error(ErrorCode::ValidationError, "pre- and post-change alphabets differ");
    }
  } else if (!std::isfinite(c.lambda)) {
    throw Error(ErrorCode::ValidationError, "lambda must be finite");
  }
  if (c.max_starts && *c.max_starts == 0) throw Error(ErrorCode::ValidationError, "max_starts must be >= 1");
}

void check_symbol(Symbol s, std::size_t k) {
  if (s >= k) throw Error(ErrorCode::InvalidArgument, "symbol " + std::to_string(s) + " outside alphabet");
}

}  // namespace

std::string to_string(DetectorMode mode) {
  switch (mode) {
    case DetectorMode::Page: return "page";
    case DetectorMode::JBPage: return "jbpage";
    case DetectorMode::Empirical: return "empirical";
  }
  return "?";
}

std::string to_string(PenaltyMode mode) {
  return mode == PenaltyMode::WindowLength ? "window" : "absolute_n";
}

DetectorMode parse_detector_mode(const std::string& s) {
  if (s == "page") return DetectorMode::Page;
  if (s == "jbpage") return DetectorMode::JBPage;
  if (s == "empirical") return DetectorMode::Empirical;
  throw Error(ErrorCode::ParseError, "unknown detector mode '" + s + "' (page|jbpage|empirical)");
}

PenaltyMode parse_penalty_mode(const std::string& s) {
  if (s == "window") return PenaltyMode::WindowLength;
  if (s == "absolute_n") return PenaltyMode::AbsoluteN;
  throw Error(ErrorCode::ParseError, "unknown penalty mode '" + s + "' (window|absolute_n)");
}

double threshold_from_gamma(double gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::ValidationError, "gamma must be > 1");
  }
  return std::log2(gamma);
}

double threshold_from_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::ValidationError, "alpha must lie in (0, 1)");
  return -std::log2(alpha);
}

DetectorConfig DetectorConfig::page(Categorical mu0, Categorical mu1, double threshold) {
  return DetectorConfig{.mode = DetectorMode::Page,
                        .lambda = 0.0,
                        .threshold = threshold,
                        .reference = std::move(mu0),
                        .post = std::move(mu1)};
}

DetectorConfig DetectorConfig::universal(DetectorMode mode, Categorical reference, double lambda, double threshold) {
  if (mode == DetectorMode::Page) throw Error(ErrorCode::InvalidArgument, "use DetectorConfig::page");
  return DetectorConfig{.mode = mode, .lambda = lambda, .threshold = threshold, .reference = std::move(reference)};
}

// ---------------------------------------------------------------------------
// Detector

Detector::Detector(DetectorConfig config)
    : config_(std::move(config)),
      k_(config_.reference.size()),
      statistic_(-kInf),
      log_table_(config_.reference.size()) {
  check_config(config_);
  if (config_.mode == DetectorMode::Page) {
    llr_.resize(k_);
    for (Symbol s = 0; s < k_; ++s) {
      const bool dead = !config_.reference.in_support(s) && !config_.post->in_support(s);
      llr_[s] = dead ? std::numeric_limits<double>::quiet_NaN() : page_llr(config_.reference, *config_.post, s);
    }
  } else {
    neg_log_ref_.resize(k_);
    for (Symbol s = 0; s < k_; ++s) {
      neg_log_ref_[s] = config_.reference.in_support(s) ? -config_.reference.log2_prob(s) : kInf;
    }
  }
}

bool Detector::step(Symbol s) {
  if (stopped()) return true;
  check_symbol(s, k_);
  if (config_.mode == DetectorMode::Page) {
    step_page(s);
  } else {
    step_universal(s);
  }
  if (statistic_ >= config_.threshold) stop_time_ = n_;
  return stopped();
}

void Detector::step_page(Symbol s) {
  const double llr = llr_[s];
  if (std::isnan(llr)) page_llr(config_.reference, *config_.post, s);  // throws SupportMismatch
  ++n_;
  statistic_ = cusum_ + llr;
  cusum_ = std::max(0.0, statistic_);
}

void Detector::step_universal(Symbol s) {
  if (std::isinf(neg_log_ref_[s])) neg_log_ref(config_.reference, s);  // throws ZeroReferenceProb
  const double lambda = config_.lambda;
  const bool window = config_.penalty == PenaltyMode::WindowLength;

  ++n_;
  starts_.push_back(n_);
  score_.push_back(-cum_neg_log_ref_ + (window ? lambda * static_cast<double>(n_ - 1) : 0.0));
  counts_.resize(counts_.size() + k_, 0);
  cum_neg_log_ref_ += neg_log_ref_[s];

  double best = -kInf;
  const std::size_t active = starts_.size();
  for (std::size_t j = 0; j < active; ++j) {
    std::uint32_t& c = counts_[j * k_ + s];
    const std::uint64_t seen = n_ - starts_[j];
    score_[j] -= log_table_.total_term(seen) - log_table_.count_term(c);
    ++c;
    best = std::max(best, score_[j]);
  }
  statistic_ = best + cum_neg_log_ref_ - lambda * static_cast<double>(n_);

  if (config_.max_starts && starts_.size() > *config_.max_starts) prune();
}

// Drops the oldest starts whose statistic sits more than `slack` below the best
// until the cap is met. Starts above that line are kept even past the cap.
void Detector::prune() {
  const double slack = config_.prune_slack.value_or(2.0 * config_.threshold);
  const double best_score = *std::max_element(score_.begin(), score_.end());
  std::size_t excess = starts_.size() - *config_.max_starts;
  std::size_t out = 0;
  for (std::size_t j = 0; j < starts_.size(); ++j) {
    if (excess > 0 && score_[j] < best_score - slack) {
      --excess;
      continue;
    }
    if (out != j) {
      starts_[out] = starts_[j];
      score_[out] = score_[j];
      std::copy_n(counts_.begin() + static_cast<std::ptrdiff_t>(j * k_), k_,
                  counts_.begin() + static_cast<std::ptrdiff_t>(out * k_));
    }
    ++out;
  }
  starts_.resize(out);
  score_.resize(out);
  counts_.resize(out * k_);
}

// ---------------------------------------------------------------------------
// AuxDetector

AuxDetector::AuxDetector(DetectorConfig config)
    : config_(std::move(config)), counts_(config_.reference.size(), 0), log_table_(config_.reference.size()) {
  check_config(config_);
}

bool AuxDetector::step(Symbol s) {
  if (stopped()) return true;
  check_symbol(s, counts_.size());
  if (config_.mode == DetectorMode::Page) {
    sum_ += page_llr(config_.reference, *config_.post, s);
    ++n_;
    statistic_ = sum_;
  } else {
    sum_ += neg_log_ref(config_.reference, s);
    kt_bits_ += log_table_.total_term(n_) - log_table_.count_term(counts_[s]);
    ++counts_[s];
    ++n_;
    statistic_ = -kt_bits_ + sum_ - config_.lambda * static_cast<double>(n_);
  }
  if (statistic_ >= config_.threshold) stop_time_ = n_;
  return stopped();
}

// ---------------------------------------------------------------------------

namespace {

template <typename D>
StopReport drive(D& det, std::span<const Symbol> stream, bool keep_trace) {
  StopReport report;
  if (keep_trace) report.trace.reserve(stream.size());
  for (Symbol s : stream) {
    const bool stop = det.step(s);
    if (keep_trace) report.trace.push_back(det.statistic());
    if (stop) break;
  }
  report.stopped = det.stopped();
  report.stop_time = det.n();
  report.final_statistic = det.statistic();
  return report;
}

}  // namespace

StopReport run_detector(const DetectorConfig& config, std::span<const Symbol> stream, bool keep_trace) {
  Detector det(config);
  return drive(det, stream, keep_trace);
}

StopReport aux_stop(std::span<const Symbol> stream, const DetectorConfig& config, bool keep_trace) {
  AuxDetector det(config);
  return drive(det, stream, keep_trace);
}

double brute_force_statistic(std::span<const Symbol> prefix, const DetectorConfig& config) {
  const std::size_t n = prefix.size();
  if (n == 0) return -kInf;
  if (n > kBruteForceLimit) throw Error(ErrorCode::TooLarge, "brute force limited to 10^4 symbols");
  const std::size_t k = config.reference.size();
  check_symbols(prefix, k);

  double best = -kInf;
  for (std::size_t start = 0; start < n; ++start) {
    const auto window = prefix.subspan(start);
    double value = 0.0;
    if (config.mode == DetectorMode::Page) {
      for (Symbol s : window) value += page_llr(config.reference, *config.post, s);
    } else {
      double nll = 0.0;
      for (Symbol s : window) nll += neg_log_ref(config.reference, s);
      const double len = static_cast<double>(config.penalty == PenaltyMode::WindowLength ? window.size() : n);
      value = -kt_length(window, k) + nll - config.lambda * len;
    }
    best = std::max(best, value);
  }
  return best;
}

ValidationReport validate_config(const DetectorConfig& config, const ValidationInputs& in) {
  check_config(config);
  ValidationReport report;

  auto require_inside = [&](const LambdaWindow& w) {
    report.window = w;
    if (!w.contains(config.lambda)) {
      std::ostringstream os;
      os << "lambda " << config.lambda << " outside window (" << w.lo << ", " << w.hi << ")";
      throw LambdaWindowError(ErrorCode::LambdaOutsideWindow, os.str(), w);
    }
  };

  switch (config.mode) {
    case DetectorMode::Page:
      break;
    case DetectorMode::JBPage: {
      if (!(config.lambda > 0.0)) {
        throw LambdaWindowError(ErrorCode::LambdaOutsideWindow, "lambda must be > 0", LambdaWindow{0.0, kInf});
      }
      if (in.mu1) {
        const LambdaWindow w{0.0, kl_divergence(*in.mu1, config.reference)};
        if (w.lo >= w.hi) throw LambdaWindowError(ErrorCode::EmptyWindow, "mu1 equals mu0", w);
        require_inside(w);
      } else {
        report.warnings.emplace_back("mu1 unknown: lambda < D(mu1 || mu0) not checked");
      }
      break;
    }
    case DetectorMode::Empirical: {
      if (in.mu0 && in.mu1 && in.estimate) {
        if (!in.estimate->full_support()) {
          throw Error(ErrorCode::SupportMismatch, "empirical estimate has zero-count symbols");
        }
        const auto& hat = in.estimate->mu_hat();
        const LambdaWindow w{std::max(std::log2(beta_bound(*in.mu0, in.delta)), kl_divergence(*in.mu0, hat)),
                             kl_divergence(*in.mu1, hat)};
        if (w.lo >= w.hi) {
          std::ostringstream os;
          os << "lambda window (" << w.lo << ", " << w.hi << ") is empty";
          throw LambdaWindowError(ErrorCode::EmptyWindow, os.str(), w);
        }
        require_inside(w);
      } else if (in.mu1 && in.estimate) {
        if (!in.estimate->full_support()) {
          report.warnings.emplace_back("empirical estimate has zero-count symbols");
        } else {
          const double hi = kl_divergence(*in.mu1, in.estimate->mu_hat());
          report.window = LambdaWindow{0.0, hi};
          if (!(config.lambda < hi)) {
            throw LambdaWindowError(ErrorCode::LambdaOutsideWindow, "lambda >= D(mu1 || mu_hat)", *report.window);
          }
        }
        report.warnings.emplace_back("mu0 unknown: lower edge max(log2 beta, D(mu0 || mu_hat)) not checked");
      } else {
        report.warnings.emplace_back("insufficient information to compute the lambda window");
      }
      if (!config.reference.full_support()) {
        report.warnings.emplace_back("reference has zero-probability symbols; they raise ZeroReferenceProb");
      }
      break;
    }
  }
  return report;
}

}  // namespace seqcd
