#pragma once

#include <istream>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "seqcd/alphabet_dist.hpp"
#include "seqcd/detectors.hpp"
#include "seqcd/empirical.hpp"
#include "seqcd/simulator.hpp"

// JSON and stream-file encodings of the library's value types.
namespace seqcd {

using Json = nlohmann::json;

Json to_json(const Categorical& dist);
Categorical categorical_from_json(const Json& j);

// Counts are written as integers so the estimate round-trips exactly.
Json to_json(const EmpiricalEstimate& est);
EmpiricalEstimate estimate_from_json(const Json& j);

Json to_json(const StopReport& report);
Json to_json(const ExperimentSummary& summary);
Json to_json(const Epsilon0& eps);
Json to_json(const ErrorProbResult& res);
Json to_json(const ArlResult& res);
Json to_json(const DelayResult& res);
Json to_json(const SlopeResult& res);
Json to_json(const OptimalityReport& res);

enum class StreamFormat { Text, Raw };

// Text: one decimal index per line (blank lines ignored). Raw: one byte per symbol, K <= 256.
std::vector<Symbol> read_stream(std::istream& in, StreamFormat format, std::size_t alphabet_size);
void write_stream(std::ostream& out, std::span<const Symbol> symbols, StreamFormat format);

}  // namespace seqcd
