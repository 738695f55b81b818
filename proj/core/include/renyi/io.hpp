#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "renyi/channel.hpp"
#include "renyi/counterexample.hpp"
#include "renyi/eatrate.hpp"

namespace renyi {

using Json = nlohmann::json;

// Bumped whenever a serialized layout changes.
inline constexpr const char* kSchemaVersion = "1";

// Complex entries are [re, im] pairs; a matrix is a list of rows.
Json to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

Json to_json(const DensityOperator& rho);
DensityOperator density_from_json(const Json& j);

Json to_json(const CqState& rho);
CqState cq_from_json(const Json& j);

// A document holding either a cq state ("registers" present) or a plain density operator.
CqState state_from_json(const Json& j);

Json to_json(const KrausChannel& ch);
KrausChannel channel_from_json(const Json& j);

Json to_json(const SamplingProtocol& p);
SamplingProtocol protocol_from_json(const Json& j);

Json to_json(const TwoQubitStrategy& s);
TwoQubitStrategy strategy_from_json(const Json& j);

Json to_json(const BellFunctional& f);
BellFunctional bell_from_json(const Json& j);

Json to_json(const ConstraintSet& cs);
ConstraintSet constraints_from_json(const Json& j);

Json to_json(const CounterexampleReport& r);
Json to_json(const RateReport& r);
Json to_json(const ComparisonRow& r);

// Throws Error(BadInput) with the path in the message on I/O or parse failure.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace renyi
