#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqcd/detectors.hpp"
#include "seqcd/empirical.hpp"
#include "seqcd/report.hpp"

namespace seqcd {

enum class Experiment { ErrorProb, Arl, Delay, Slope, Optimality };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& s);

// Fully resolved run configuration. Every output embeds to_json() of this.
struct RunConfig {
  std::size_t alphabet_size = 2;
  std::vector<double> mu0;
  std::optional<std::vector<double>> mu1;
  std::size_t n0 = 0;
  double delta = 0.0;
  std::optional<double> lambda;
  std::optional<double> kappa;
  std::optional<double> gamma;
  std::optional<double> alpha;
  DetectorMode mode = DetectorMode::JBPage;
  std::string code = "kt";
  PenaltyMode penalty = PenaltyMode::WindowLength;
  Smoothing smoothing = Smoothing::None;
  std::size_t horizon = 0;  // 0: experiment default
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::optional<std::size_t> change_point;  // unset: no change
  std::optional<std::size_t> max_starts;
  std::optional<double> prune_slack;
  Experiment experiment = Experiment::Delay;
  std::vector<double> gammas;
  std::vector<std::size_t> n0_schedule;
  bool redraw_warmup = false;
  unsigned threads = 0;

  Categorical mu0_dist() const { return Categorical(mu0); }
  std::optional<Categorical> mu1_dist() const;

  // Detector threshold in bits: log2 gamma, else -log2 alpha.
  double threshold() const;
  // Detector for the given reference (mu0 or an empirical estimate).
  DetectorConfig detector(const Categorical& reference) const;

  Json to_json() const;
};

// Throws ParseError for malformed text and ValidationError (field-prefixed
// message) or LambdaWindowError for inconsistent values.
RunConfig parse_config(const Json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace seqcd
