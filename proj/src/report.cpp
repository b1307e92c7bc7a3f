#include "seqcd/report.hpp"

#include <cmath>
#include <string>

#include "seqcd/error.hpp"

namespace seqcd {

namespace {

// Non-finite values have no JSON encoding; they become strings.
Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

Json to_json(const Categorical& dist) { return Json{{"probs", dist.probs()}}; }

Categorical categorical_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("probs") || !j.at("probs").is_array()) {
    throw Error(ErrorCode::ParseError, "distribution must be an object with a \"probs\" array");
  }
  try {
    return Categorical(j.at("probs").get<std::vector<double>>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("probs: ") + e.what());
  }
}

Json to_json(const EmpiricalEstimate& est) {
  return Json{{"counts", est.counts()}, {"n0", est.n0()}, {"mu_hat", est.mu_hat().probs()},
              {"full_support", est.full_support()}};
}

EmpiricalEstimate estimate_from_json(const Json& j) {
  try {
    auto counts = j.at("counts").get<std::vector<std::uint64_t>>();
    Alphabet alphabet(counts.size());
    EmpiricalEstimate est(alphabet, std::move(counts));
    if (j.contains("n0") && j.at("n0").get<std::uint64_t>() != est.n0()) {
      throw Error(ErrorCode::ParseError, "n0 does not equal the sum of counts");
    }
    return est;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("estimate: ") + e.what());
  }
}

Json to_json(const StopReport& report) {
  Json j{{"stopped", report.stopped}, {"stop_time", report.stop_time},
         {"final_statistic", number(report.final_statistic)}};
  return j;
}

Json to_json(const ExperimentSummary& s) {
  return Json{{"trials", s.trials},
              {"mean_stop_time", s.mean_stop_time},
              {"var_stop_time", s.var_stop_time},
              {"stop_time_half_width", s.stop_time_half_width},
              {"mean_delay", s.mean_delay},
              {"var_delay", s.var_delay},
              {"delay_half_width", s.delay_half_width},
              {"false_alarm_fraction", s.false_alarm_fraction},
              {"false_alarm_half_width", s.false_alarm_half_width},
              {"censored_fraction", s.censored_fraction},
              {"reference_defects", s.reference_defects}};
}

Json to_json(const Epsilon0& eps) {
  return Json{{"hoeffding", eps.hoeffding},
              {"measured", eps.measured},
              {"measured_upper", eps.measured_upper},
              {"used", eps.used},
              {"provenance", eps.provenance}};
}

Json to_json(const ErrorProbResult& res) {
  Json j{{"summary", to_json(res.summary)}, {"threshold_bits", res.threshold}, {"log2_beta", res.log2_beta},
         {"bound", number(res.bound)},      {"sigma", res.sigma},               {"pass", res.pass}};
  if (res.epsilon0) j["epsilon0"] = to_json(*res.epsilon0);
  return j;
}

Json to_json(const ArlResult& res) {
  Json j{{"summary", to_json(res.summary)}, {"horizon", res.horizon}, {"log2_beta", res.log2_beta},
         {"bound", number(res.bound)},      {"pass", res.pass}};
  if (res.epsilon0) j["epsilon0"] = to_json(*res.epsilon0);
  return j;
}

Json to_json(const DelayResult& res) {
  Json j{{"summary", to_json(res.summary)},
         {"horizon", res.horizon},
         {"drift", number(res.drift)},
         {"predicted_delay", number(res.predicted_delay)}};
  if (res.warmup_counts) j["warmup_counts"] = *res.warmup_counts;
  return j;
}

Json to_json(const SlopeResult& res) {
  Json points = Json::array();
  for (const auto& p : res.points) points.push_back(to_json(p));
  return Json{{"log2_gammas", res.log2_gammas},
              {"mean_delays", res.mean_delays},
              {"residuals", res.residuals},
              {"slope", res.slope},
              {"intercept", res.intercept},
              {"predicted_slope", number(res.predicted_slope)},
              {"relative_error", number(res.relative_error)},
              {"points", points}};
}

Json to_json(const OptimalityReport& res) {
  Json rows = Json::array();
  for (const auto& r : res.rows) {
    rows.push_back(Json{{"n0", r.n0},
                        {"feasible", r.feasible},
                        {"reason", r.reason},
                        {"lambda", r.lambda},
                        {"log2_beta", r.log2_beta},
                        {"d_mu0_hat", r.d_mu0_hat},
                        {"d_mu1_hat", r.d_mu1_hat},
                        {"threshold_bits", r.threshold},
                        {"predicted_delay", number(r.predicted_delay)},
                        {"mean_delay", r.mean_delay},
                        {"delay_half_width", r.delay_half_width},
                        {"censored_fraction", r.censored_fraction},
                        {"ratio", r.ratio},
                        {"drift_warning", r.drift_warning}});
  }
  return Json{{"d_mu1_mu0", res.d_mu1_mu0}, {"lorden_delay", res.lorden_delay}, {"rows", rows}};
}

std::vector<Symbol> read_stream(std::istream& in, StreamFormat format, std::size_t alphabet_size) {
  std::vector<Symbol> out;
  if (format == StreamFormat::Raw) {
    if (alphabet_size > 256) throw Error(ErrorCode::InvalidArgument, "raw streams require K <= 256");
    char c;
    while (in.get(c)) out.push_back(static_cast<unsigned char>(c));
  } else {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      std::size_t pos = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(line.substr(first), &pos);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": not a symbol index");
      }
      if (line.find_first_not_of(" \t\r", first + pos) != std::string::npos) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": trailing characters");
      }
      out.push_back(static_cast<Symbol>(v));
    }
  }
  check_symbols(out, alphabet_size);
  return out;
}

void write_stream(std::ostream& out, std::span<const Symbol> symbols, StreamFormat format) {
  if (format == StreamFormat::Raw) {
    for (Symbol s : symbols) {
      if (s > 255) throw Error(ErrorCode::InvalidArgument, "raw streams require symbols < 256");
      out.put(static_cast<char>(s));
    }
  } else {
    for (Symbol s : symbols) out << s << '\n';
  }
}

}  // namespace seqcd
