#pragma once

// Scenario files (JSON), trace files (CSV with '#' headers), and overrides
// used by sweeps and the command line.

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "uavflow/mission.hpp"
#include "uavflow/scenario.hpp"

namespace uavflow {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "uavflow 1.0.0";

double dbm_to_w(double dbm);
double w_to_dbm(double w);

/// Recomputes derived fields: reference losses from the carrier, evenly
/// spaced relays, and the fading seed.
void finalize(Scenario& scenario);

/// Defaults with 8 relays evenly spaced between BS and UE and no interferers.
Scenario default_scenario();

nlohmann::json scenario_to_json(const Scenario& scenario);
/// Throws SchemaError / RangeError.
Scenario scenario_from_json(const nlohmann::json& doc);

Scenario parse_scenario(std::string_view text);
std::string serialize_scenario(const Scenario& scenario);
Scenario load_scenario(const std::string& path);

/// FNV-1a over the canonical serialization.
std::uint64_t scenario_hash(const Scenario& scenario);

/// Sets one field from its textual value. `field` is a dotted JSON path
/// ("power.i_max_dbm") or one of the short aliases i_max_dbm, p_max_dbm,
/// r_th_bps, h_ue_m, tau, seed, mode, dims, topology, laplacian, dt,
/// weights. For tau, the value "naive" turns smart interferers static.
Scenario apply_override(const Scenario& scenario, const std::string& field, const std::string& value);

std::string format_trace(const SimulationTrace& trace);
/// Throws SchemaError on malformed input.
SimulationTrace parse_trace(std::string_view text);

/// Throws std::runtime_error naming the path on I/O failure.
void export_trace(const SimulationTrace& trace, const std::string& path);
SimulationTrace import_trace(const std::string& path);

}  // namespace uavflow
