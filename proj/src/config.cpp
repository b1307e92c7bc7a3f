#include "seqcd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace seqcd {

namespace {

const std::set<std::string> kKnownKeys = {
    "K",       "mu0",          "mu1",         "n0",     "delta",     "lambda",      "kappa",
    "gamma",   "alpha",        "mode",        "code",   "penalty",   "smoothing",   "horizon",
    "trials",  "seed",         "change_point", "max_starts", "prune_slack", "experiment", "gammas",
    "n0_schedule", "redraw_warmup", "threads"};

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ValidationError, field + ": " + msg);
}

template <typename T>
T field(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    invalid(key, std::string("wrong type (") + e.what() + ")");
  }
}

template <typename T>
std::optional<T> optional_field(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<T>(j, key);
}

std::size_t count_field(const Json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) invalid(key, "must be a non-negative integer");
  return v.get<std::size_t>();
}

Categorical checked_dist(const std::vector<double>& probs, std::size_t k, const char* key) {
  if (probs.size() != k) {
    invalid(key, "has " + std::to_string(probs.size()) + " entries, expected K = " + std::to_string(k));
  }
  try {
    return Categorical(probs);
  } catch (const Error& e) {
    invalid(key, e.what());
  }
}

// Re-labels a parse failure from the enum helpers as a field error.
template <typename F>
auto enum_field(const Json& j, const char* key, F parse) {
  const auto text = field<std::string>(j, key);
  try {
    return parse(text);
  } catch (const Error& e) {
    invalid(key, e.what());
  }
}

Smoothing parse_smoothing(const std::string& s) {
  if (s == "none") return Smoothing::None;
  if (s == "add_half") return Smoothing::AddHalf;
  invalid("smoothing", "expected none|add_half, got '" + s + "'");
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::ErrorProb: return "error-prob";
    case Experiment::Arl: return "arl";
    case Experiment::Delay: return "delay";
    case Experiment::Slope: return "slope";
    case Experiment::Optimality: return "optimality";
  }
  return "?";
}

Experiment parse_experiment(const std::string& s) {
  if (s == "error-prob") return Experiment::ErrorProb;
  if (s == "arl") return Experiment::Arl;
  if (s == "delay") return Experiment::Delay;
  if (s == "slope") return Experiment::Slope;
  if (s == "optimality") return Experiment::Optimality;
  invalid("experiment", "expected error-prob|arl|delay|slope|optimality, got '" + s + "'");
}

std::optional<Categorical> RunConfig::mu1_dist() const {
  if (!mu1) return std::nullopt;
  return Categorical(*mu1);
}

double RunConfig::threshold() const {
  if (gamma) return threshold_from_gamma(*gamma);
  if (alpha) return threshold_from_alpha(*alpha);
  invalid("gamma", "one of gamma or alpha is required");
}

DetectorConfig RunConfig::detector(const Categorical& reference) const {
  DetectorConfig cfg = mode == DetectorMode::Page
                           ? DetectorConfig::page(reference, *mu1_dist(), threshold())
                           : DetectorConfig::universal(mode, reference, lambda.value_or(0.0), threshold());
  cfg.penalty = penalty;
  cfg.max_starts = max_starts;
  cfg.prune_slack = prune_slack;
  return cfg;
}

Json RunConfig::to_json() const {
  auto opt = [](const auto& v) -> Json {
    if (v) return Json(*v);
    return nullptr;
  };
  return Json{{"K", alphabet_size},
              {"mu0", mu0},
              {"mu1", opt(mu1)},
              {"n0", n0},
              {"delta", delta},
              {"lambda", opt(lambda)},
              {"kappa", opt(kappa)},
              {"gamma", opt(gamma)},
              {"alpha", opt(alpha)},
              {"mode", seqcd::to_string(mode)},
              {"code", code},
              {"penalty", seqcd::to_string(penalty)},
              {"smoothing", smoothing == Smoothing::None ? "none" : "add_half"},
              {"horizon", horizon},
              {"trials", trials},
              {"seed", seed},
              {"change_point", opt(change_point)},
              {"max_starts", opt(max_starts)},
              {"prune_slack", opt(prune_slack)},
              {"experiment", seqcd::to_string(experiment)},
              {"gammas", gammas},
              {"n0_schedule", n0_schedule},
              {"redraw_warmup", redraw_warmup},
              {"threads", threads}};
}

RunConfig parse_config(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKnownKeys.contains(key)) invalid(key, "unknown key");
  }

  RunConfig c;
  if (!j.contains("mu0")) invalid("mu0", "required");
  c.mu0 = field<std::vector<double>>(j, "mu0");
  c.alphabet_size = j.contains("K") ? count_field(j, "K") : c.mu0.size();
  if (c.alphabet_size < 2) invalid("K", "must be >= 2");
  const Categorical mu0 = checked_dist(c.mu0, c.alphabet_size, "mu0");
  c.mu0 = mu0.probs();
  std::optional<Categorical> mu1;
  if (auto v = optional_field<std::vector<double>>(j, "mu1")) {
    mu1 = checked_dist(*v, c.alphabet_size, "mu1");
    c.mu1 = mu1->probs();
  }

  if (j.contains("mode")) c.mode = enum_field(j, "mode", parse_detector_mode);
  if (j.contains("penalty")) c.penalty = enum_field(j, "penalty", parse_penalty_mode);
  if (j.contains("smoothing")) c.smoothing = parse_smoothing(field<std::string>(j, "smoothing"));
  if (j.contains("experiment")) c.experiment = parse_experiment(field<std::string>(j, "experiment"));
  if (j.contains("code")) {
    c.code = field<std::string>(j, "code");
    if (c.code != "kt") invalid("code", "only 'kt' is available");
  }
  if (j.contains("n0")) c.n0 = count_field(j, "n0");
  if (j.contains("horizon")) c.horizon = count_field(j, "horizon");
  if (j.contains("trials")) c.trials = count_field(j, "trials");
  if (j.contains("threads")) c.threads = static_cast<unsigned>(count_field(j, "threads"));
  if (j.contains("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_unsigned()) invalid("seed", "must be a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  }
  if (j.contains("change_point") && !j.at("change_point").is_null()) {
    c.change_point = count_field(j, "change_point");
    if (*c.change_point == 0) invalid("change_point", "is 1-based; use null for no change");
  }
  if (j.contains("max_starts") && !j.at("max_starts").is_null()) {
    c.max_starts = count_field(j, "max_starts");
    if (*c.max_starts == 0) invalid("max_starts", "must be >= 1");
  }
  c.prune_slack = optional_field<double>(j, "prune_slack");
  c.redraw_warmup = optional_field<bool>(j, "redraw_warmup").value_or(false);
  c.delta = optional_field<double>(j, "delta").value_or(0.0);
  if (!(c.delta >= 0.0 && c.delta < 1.0)) invalid("delta", "must lie in [0, 1)");
  c.lambda = optional_field<double>(j, "lambda");
  c.kappa = optional_field<double>(j, "kappa");
  c.gamma = optional_field<double>(j, "gamma");
  c.alpha = optional_field<double>(j, "alpha");
  if (j.contains("gammas")) c.gammas = field<std::vector<double>>(j, "gammas");
  if (j.contains("n0_schedule")) c.n0_schedule = field<std::vector<std::size_t>>(j, "n0_schedule");

  // Cross-field checks.
  if (c.gamma && !(*c.gamma > 1.0)) invalid("gamma", "must be > 1");
  if (c.alpha && !(*c.alpha > 0.0 && *c.alpha < 1.0)) invalid("alpha", "must lie in (0, 1)");
  if (c.kappa && !(*c.kappa > 0.0)) invalid("kappa", "must be > 0");
  for (double g : c.gammas) {
    if (!(g > 1.0)) invalid("gammas", "every gamma must be > 1");
  }
  if (c.mode == DetectorMode::Page && !mu1) invalid("mu1", "required in page mode");
  if (c.mode == DetectorMode::Empirical && c.n0 == 0 && c.experiment != Experiment::Optimality) {
    invalid("n0", "empirical mode needs a warm-up prefix (n0 > 0)");
  }
  if (c.delta > 0.0 && c.delta >= mu0.min_positive_prob()) {
    invalid("delta", "must be below the smallest positive mu0 probability");
  }
  const bool needs_lambda = c.mode != DetectorMode::Page && c.experiment != Experiment::Optimality;
  if (needs_lambda && !c.lambda) invalid("lambda", "required for jbpage and empirical modes");
  if (c.experiment == Experiment::Optimality) {
    if (!c.kappa) invalid("kappa", "required for the optimality experiment");
    if (!mu1) invalid("mu1", "required for the optimality experiment");
  }

  // Lambda window. Empirical mode has no warm-up yet, so the asymptotic window
  // (mu_hat = mu0) is checked here; detect re-checks against the real estimate.
  if (needs_lambda) {
    DetectorConfig probe = DetectorConfig::universal(c.mode, mu0, *c.lambda, 1.0);
    ValidationInputs in{.mu0 = mu0, .mu1 = mu1, .delta = c.delta};
    if (c.mode == DetectorMode::Empirical && mu1) {
      const LambdaWindow w{std::log2(beta_bound(mu0, c.delta)), kl_divergence(*mu1, mu0)};
      if (w.lo >= w.hi) throw LambdaWindowError(ErrorCode::EmptyWindow, "lambda window is empty", w);
      if (!w.contains(*c.lambda)) {
        std::ostringstream os;
        os << "lambda " << *c.lambda << " outside window (" << w.lo << ", " << w.hi << ")";
        throw LambdaWindowError(ErrorCode::LambdaOutsideWindow, os.str(), w);
      }
    } else if (c.mode == DetectorMode::JBPage) {
      validate_config(probe, in);
    }
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return parse_config(j);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace seqcd
