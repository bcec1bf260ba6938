#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "qdfss/device.hpp"
#include "qdfss/excitonics.hpp"
#include "qdfss/poisson.hpp"
#include "qdfss/sweep.hpp"

namespace qdfss {

struct SweepConfig {
    double quadrupole_v_min_V = -0.5;
    double quadrupole_v_max_V = 0.7;
    std::size_t quadrupole_points = 13;
    double lateral_v_min_V = 0.0;
    double lateral_v_max_V = 0.4;
    std::size_t lateral_points = 9;
    double grid_v_fixed_V = 0.5;
    double grid_rl_min_V = 0.0;
    double grid_rl_max_V = 0.2;
    double grid_tb_min_V = 0.0;
    double grid_tb_max_V = 0.2;
    std::size_t grid_rl_points = 11;
    std::size_t grid_tb_points = 11;
    SweepOptions options;

    bool operator==(const SweepConfig&) const = default;
};

struct OptimizeConfig {
    QuadrupoleParam initial{0.5, 0.0, 0.0};
    OptimizeBounds bounds;
    OptimizeOptions options;

    bool operator==(const OptimizeConfig&) const = default;
};

struct OutputConfig {
    std::string directory = ".";
    std::string prefix = "qdfss";

    bool operator==(const OutputConfig&) const = default;
};

/// Everything a run needs. Defaults describe the reference device.
struct RunConfig {
    DeviceSpec device;
    SimulationOptions simulation;
    GateVoltages gates;
    SweepConfig sweep;
    OptimizeConfig optimize;
    OutputConfig output;

    bool operator==(const RunConfig&) const = default;
};

/// Parses sectioned `key = value` text. Lines starting with '#' or ';' are
/// comments. Unknown sections, unknown keys, repeated keys and malformed
/// values throw ConfigError with the line number and the offending name.
/// Keys not given keep their defaults.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Writes every key, so parse_config(write) reproduces `config` exactly.
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace qdfss
