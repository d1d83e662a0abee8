#pragma once

#include <json.hpp>

#include "cpelt/simlab.hpp"

namespace cpelt::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";

/// Simulation config from JSON whose keys mirror SimConfig. Unknown keys and
/// wrong types are schema errors. The optional "detector" key is returned
/// separately.
struct SimRequest {
  SimConfig cfg;
  Detector detector = Detector::el;
};
SimRequest parse_sim_config(const Json& j);

Json to_json(const SimConfig& cfg);
Json to_json(const KhatSummary& s);
Json to_json(const SimReport& report, const SimConfig& cfg);

/// Envelope shared by every command.
Json make_report(const std::string& command, const std::string& digest, Json payload, double timing_ms);

}  // namespace cpelt::cli
