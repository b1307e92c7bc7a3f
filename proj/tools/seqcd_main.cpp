// seqcd: sequential change detection with universal codes.
//
// Exit codes: 0 success / no alarm, 2 alarm (detect only), 1 error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqcd/config.hpp"
#include "seqcd/detectors.hpp"
#include "seqcd/empirical.hpp"
#include "seqcd/error.hpp"
#include "seqcd/report.hpp"
#include "seqcd/simulator.hpp"
#include "seqcd/universal_code.hpp"
#include "seqcd/verify.hpp"
#include "seqcd/version.hpp"

namespace {

using seqcd::Json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAlarm = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> horizon;
  std::optional<unsigned> threads;
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::optional<std::string> experiment;
  std::optional<std::string> mode;

  void add_to(CLI::App* app) {
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--trials", trials, "Monte Carlo trials");
    app->add_option("--horizon", horizon, "Post-warm-up horizon (0 = experiment default)");
    app->add_option("--threads", threads, "Worker threads (0 = all cores)");
    app->add_option("--lambda", lambda, "Drift penalty, bits per symbol");
    app->add_option("--gamma", gamma, "Threshold gamma (> 1)");
    app->add_option("--alpha", alpha, "Auxiliary-test level alpha in (0,1)");
    app->add_option("--experiment", experiment, "error-prob|arl|delay|slope|optimality");
    app->add_option("--mode", mode, "page|jbpage|empirical");
  }

  void apply(Json& j) const {
    if (seed) j["seed"] = *seed;
    if (trials) j["trials"] = *trials;
    if (horizon) j["horizon"] = *horizon;
    if (threads) j["threads"] = *threads;
    if (lambda) j["lambda"] = *lambda;
    if (gamma) j["gamma"] = *gamma;
    if (alpha) j["alpha"] = *alpha;
    if (experiment) j["experiment"] = *experiment;
    if (mode) j["mode"] = *mode;
  }
};

struct ConfigSource {
  std::string path;
  std::string inline_text;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", path, "Config file (JSON)");
    app->add_option("--config-text", inline_text, "Inline config (JSON)");
  }

  seqcd::RunConfig load(const Overrides& ov) const {
    std::string text = inline_text;
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw seqcd::Error(seqcd::ErrorCode::IoError, "cannot open config file " + path);
      std::stringstream buf;
      buf << in.rdbuf();
      text = buf.str();
    }
    if (text.empty()) throw seqcd::Error(seqcd::ErrorCode::ParseError, "no config given (--config or --config-text)");
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw seqcd::Error(seqcd::ErrorCode::ParseError, e.what());
    }
    ov.apply(j);
    return seqcd::parse_config(j);
  }
};

// Writes to the file at path, or stdout when path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw seqcd::Error(seqcd::ErrorCode::IoError, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

Json envelope(const seqcd::RunConfig& cfg) {
  return Json{{"tool", "seqcd"}, {"version", seqcd::kVersion}, {"rng", seqcd::Rng::kName}, {"config", cfg.to_json()}};
}

std::string csv_banner(const seqcd::RunConfig& cfg) {
  return "# seqcd " + std::string(seqcd::kVersion) + " config=" + cfg.to_json().dump() + "\n";
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// --- detect ------------------------------------------------------------------

struct DetectArgs {
  ConfigSource config;
  Overrides overrides;
  std::string stream_path;
  bool raw = false;
  std::string trace_path;
  std::string out_path;
};

int run_detect(const DetectArgs& a) {
  const auto cfg = a.config.load(a.overrides);
  std::ifstream in(a.stream_path, std::ios::binary);
  if (!in) throw seqcd::Error(seqcd::ErrorCode::IoError, "cannot open stream file " + a.stream_path);
  const auto symbols =
      seqcd::read_stream(in, a.raw ? seqcd::StreamFormat::Raw : seqcd::StreamFormat::Text, cfg.alphabet_size);

  Json out = envelope(cfg);
  const seqcd::Categorical mu0 = cfg.mu0_dist();
  std::span<const seqcd::Symbol> post(symbols);
  seqcd::DetectorConfig det_cfg = cfg.detector(mu0);
  seqcd::ValidationInputs inputs{.mu0 = mu0, .mu1 = cfg.mu1_dist(), .delta = cfg.delta};

  if (cfg.mode == seqcd::DetectorMode::Empirical) {
    if (symbols.size() < cfg.n0) {
      throw seqcd::Error(seqcd::ErrorCode::EmptyPrefix, "stream shorter than the warm-up prefix n0");
    }
    const auto est = seqcd::estimate_empirical(post.first(cfg.n0), seqcd::Alphabet(cfg.alphabet_size));
    out["estimate"] = seqcd::to_json(est);
    det_cfg.reference = est.reference(cfg.smoothing);
    inputs.estimate = est;
    post = post.subspan(cfg.n0);
  }
  const auto validation = seqcd::validate_config(det_cfg, inputs);
  out["warnings"] = validation.warnings;
  if (validation.window) out["lambda_window"] = {validation.window->lo, validation.window->hi};

  const bool trace = !a.trace_path.empty();
  const auto report = seqcd::run_detector(det_cfg, post, trace);
  out["report"] = seqcd::to_json(report);

  if (trace) {
    Output t(a.trace_path);
    t.stream() << "n,statistic\n";
    for (std::size_t i = 0; i < report.trace.size(); ++i) {
      t.stream() << (i + 1) << ',' << fmt17(report.trace[i]) << '\n';
    }
  }
  Output o(a.out_path);
  o.stream() << out.dump(2) << '\n';
  return report.stopped ? kExitAlarm : kExitOk;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  ConfigSource config;
  Overrides overrides;
  std::string out_path;
  std::string summary_path;
};

int run_simulate(const SimulateArgs& a) {
  const auto cfg = a.config.load(a.overrides);
  const seqcd::MonteCarloOptions mc{.trials = cfg.trials, .seed = cfg.seed, .horizon = cfg.horizon,
                                    .threads = cfg.threads};
  const seqcd::Categorical mu0 = cfg.mu0_dist();
  const auto mu1 = cfg.mu1_dist();
  auto need_mu1 = [&]() -> const seqcd::Categorical& {
    if (!mu1) throw seqcd::Error(seqcd::ErrorCode::ValidationError, "mu1: required for this experiment");
    return *mu1;
  };

  Json summary = envelope(cfg);
  std::ostringstream csv;
  csv << csv_banner(cfg);

  switch (cfg.experiment) {
    case seqcd::Experiment::ErrorProb: {
      const auto res = seqcd::estimate_error_prob(seqcd::ErrorProbSetup{
          .mode = cfg.mode, .mu0 = mu0, .lambda = cfg.lambda.value_or(0.0),
          .alpha = cfg.alpha.value_or(0.01), .n0 = cfg.n0, .delta = cfg.delta, .smoothing = cfg.smoothing,
          .mc = mc});
      summary["result"] = seqcd::to_json(res);
      seqcd::write_trials_csv(csv, res.trials);
      break;
    }
    case seqcd::Experiment::Arl: {
      const auto res = seqcd::estimate_arl0(seqcd::ArlSetup{
          .mode = cfg.mode, .mu0 = mu0, .mu1 = mu1, .lambda = cfg.lambda.value_or(0.0),
          .gamma = cfg.gamma.value_or(8.0), .n0 = cfg.n0, .delta = cfg.delta, .smoothing = cfg.smoothing,
          .penalty = cfg.penalty, .max_starts = cfg.max_starts, .mc = mc});
      summary["result"] = seqcd::to_json(res);
      seqcd::write_trials_csv(csv, res.trials);
      break;
    }
    case seqcd::Experiment::Delay:
    case seqcd::Experiment::Slope: {
      seqcd::DelaySetup setup{.mode = cfg.mode,
                              .mu0 = mu0,
                              .mu1 = need_mu1(),
                              .lambda = cfg.lambda.value_or(0.0),
                              .threshold = 1.0,
                              .n0 = cfg.n0,
                              .change_point = cfg.change_point.value_or(1),
                              .smoothing = cfg.smoothing,
                              .penalty = cfg.penalty,
                              .max_starts = cfg.max_starts,
                              .redraw_warmup = cfg.redraw_warmup,
                              .mc = mc};
      if (cfg.experiment == seqcd::Experiment::Delay) {
        setup.threshold = cfg.threshold();
        const auto res = seqcd::estimate_worst_delay(setup);
        summary["result"] = seqcd::to_json(res);
        seqcd::write_trials_csv(csv, res.trials);
      } else {
        if (cfg.gammas.size() < 4) {
          throw seqcd::Error(seqcd::ErrorCode::ValidationError, "gammas: slope needs at least 4 values");
        }
        const auto res = seqcd::delay_slope(setup, cfg.gammas);
        summary["result"] = seqcd::to_json(res);
        for (std::size_t i = 0; i < res.points.size(); ++i) {
          std::ostringstream block;
          seqcd::write_trials_csv(block, res.points[i].trials);
          std::string text = block.str();
          if (i > 0) text = text.substr(text.find('\n') + 1);  // single header row
          csv << "# gamma=" << fmt17(cfg.gammas[i]) << '\n' << text;
        }
      }
      break;
    }
    case seqcd::Experiment::Optimality: {
      const auto res = seqcd::optimality_experiment(seqcd::OptimalitySetup{
          .mu0 = mu0, .mu1 = need_mu1(), .kappa = *cfg.kappa, .gamma = cfg.gamma.value_or(4096.0),
          .n0_schedule = cfg.n0_schedule.empty() ? std::vector<std::size_t>{cfg.n0} : cfg.n0_schedule,
          .delta = cfg.delta, .mc = mc});
      summary["result"] = seqcd::to_json(res);
      csv << "n0,feasible,lambda,threshold_bits,mean_delay,ratio\n";
      for (const auto& r : res.rows) {
        csv << r.n0 << ',' << (r.feasible ? 1 : 0) << ',' << fmt17(r.lambda) << ',' << fmt17(r.threshold) << ','
            << fmt17(r.mean_delay) << ',' << fmt17(r.ratio) << '\n';
      }
      break;
    }
  }

  {
    Output o(a.out_path);
    o.stream() << csv.str();
  }
  if (!a.summary_path.empty()) {
    Output s(a.summary_path);
    s.stream() << summary.dump(2) << '\n';
  } else if (!a.out_path.empty() && a.out_path != "-") {
    std::cout << summary.dump(2) << '\n';
  }
  return kExitOk;
}

// --- verify ------------------------------------------------------------------

struct VerifyArgs {
  std::vector<std::string> suites;
  std::uint64_t seed = seqcd::VerifyOptions{}.seed;
  unsigned threads = 0;
  std::string out_path;
};

int run_verify(const VerifyArgs& a) {
  std::vector<std::string> suites = a.suites;
  if (suites.empty() || (suites.size() == 1 && suites.front() == "all")) suites = seqcd::suite_names();
  Output o(a.out_path);
  auto& os = o.stream();
  os << "# seqcd " << seqcd::kVersion << " verify seed=" << a.seed << " rng=" << seqcd::Rng::kName << '\n';
  bool all = true;
  for (const auto& name : suites) {
    for (const auto& r : seqcd::run_suite(name, seqcd::VerifyOptions{.seed = a.seed, .threads = a.threads})) {
      seqcd::print_result(os, r);
      os.flush();
      all = all && r.passed;
    }
  }
  return all ? kExitOk : kExitError;
}

// --- code-stats ----------------------------------------------------------------

struct CodeStatsArgs {
  std::size_t k = 2;
  std::vector<std::size_t> ns;
  std::vector<double> probs;
  std::string mode = "exhaustive";
  std::size_t samples = 64;
  std::uint64_t seed = 1;
  std::string out_path;
};

int run_code_stats(const CodeStatsArgs& a) {
  const seqcd::KTCoder kt(a.k);
  const seqcd::Categorical dist = a.probs.empty() ? seqcd::Categorical::uniform(a.k) : seqcd::Categorical(a.probs);
  if (dist.size() != a.k) throw seqcd::Error(seqcd::ErrorCode::InvalidArgument, "--dist length must equal --K");
  std::vector<std::size_t> ns = a.ns;
  if (ns.empty()) {
    for (std::size_t n = 0; n <= 12; ++n) ns.push_back(n);
  }
  seqcd::RedundancyOptions ro{.samples = a.samples, .seed = a.seed};
  if (a.mode == "exhaustive") {
    ro.mode = seqcd::RedundancyMode::Exhaustive;
  } else if (a.mode == "sampled") {
    ro.mode = seqcd::RedundancyMode::Sampled;
  } else {
    throw seqcd::Error(seqcd::ErrorCode::InvalidArgument, "--mode must be exhaustive or sampled");
  }

  Json echo{{"K", a.k}, {"code", kt.name()}, {"dist", dist.probs()}, {"mode", a.mode},
            {"samples", a.samples}, {"seed", a.seed}};
  Output o(a.out_path);
  auto& os = o.stream();
  os << "# seqcd " << seqcd::kVersion << " code-stats config=" << echo.dump() << '\n';
  os << "n,kraft_sum,max_redundancy_bits\n";
  for (std::size_t n : ns) {
    std::string kraft = "NA";
    try {
      kraft = fmt17(seqcd::kraft_sum(kt, n));
    } catch (const seqcd::Error& e) {
      if (e.code() != seqcd::ErrorCode::TooLarge) throw;
    }
    os << n << ',' << kraft << ',' << fmt17(seqcd::redundancy(kt, dist, n, ro)) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential change detection with universal codes and empirical pre-change estimates"};
  app.set_version_flag("--version", std::string("seqcd ") + seqcd::kVersion);
  app.require_subcommand(1);

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Run a detector over a symbol stream");
  detect.config.add_to(detect_cmd);
  detect.overrides.add_to(detect_cmd);
  detect_cmd->add_option("-s,--stream", detect.stream_path, "Stream file")->required();
  detect_cmd->add_flag("--raw", detect.raw, "Stream is raw bytes (K <= 256)");
  detect_cmd->add_option("--trace", detect.trace_path, "Write n,statistic per step to this CSV");
  detect_cmd->add_option("-o,--out", detect.out_path, "Report path (default stdout)");

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  simulate.config.add_to(simulate_cmd);
  simulate.overrides.add_to(simulate_cmd);
  simulate_cmd->add_option("-o,--out", simulate.out_path, "Per-trial CSV path (default stdout)");
  simulate_cmd->add_option("--summary", simulate.summary_path, "Summary JSON path");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run named acceptance suites");
  verify_cmd->add_option("suites", verify.suites, "Suites (kraft redundancy oracle error-bound arl slope "
                                                  "termination log-ratio optimality reproducibility | all)");
  verify_cmd->add_option("--seed", verify.seed, "Master seed");
  verify_cmd->add_option("--threads", verify.threads, "Worker threads (0 = all cores)");
  verify_cmd->add_option("-o,--out", verify.out_path, "Output path (default stdout)");

  CodeStatsArgs stats;
  auto* stats_cmd = app.add_subcommand("code-stats", "Kraft sums and redundancy of the KT code");
  stats_cmd->add_option("-K,--K", stats.k, "Alphabet size")->check(CLI::Range(2, 1 << 16));
  stats_cmd->add_option("--n", stats.ns, "Sequence lengths (default 0..12)");
  stats_cmd->add_option("--dist", stats.probs, "Source distribution for redundancy (default uniform)");
  stats_cmd->add_option("--mode", stats.mode, "exhaustive|sampled");
  stats_cmd->add_option("--samples", stats.samples, "Sampled mode: sequences per n");
  stats_cmd->add_option("--seed", stats.seed, "Sampled mode seed");
  stats_cmd->add_option("-o,--out", stats.out_path, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*detect_cmd) return run_detect(detect);
    if (*simulate_cmd) return run_simulate(simulate);
    if (*verify_cmd) return run_verify(verify);
    if (*stats_cmd) return run_code_stats(stats);
  } catch (const seqcd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
