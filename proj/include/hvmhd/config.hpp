#pragma once

#include "hvmhd/state.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvmhd {

// One real Fourier mode of an initial field:
//   cos_amp * cos(k.x) + sin_amp * sin(k.x).
// Divergence-free iff k.cos_amp = k.sin_amp = 0, which parsing enforces
// unless projection was requested.
struct FourierMode {
    std::array<int, 3> k{0, 0, 0};
    std::array<double, 3> cos_amp{0.0, 0.0, 0.0};
    std::array<double, 3> sin_amp{0.0, 0.0, 0.0};
};

// Everything a run needs, parsed from a line-oriented config file with
// [section] headers and key = value entries. The format is documented in
// README.md; dump_config() emits the normalized form, and parsing that dump
// reproduces it verbatim.
struct RunConfig {
    // [grid]
    int n = 0;
    double dealias_fraction = 1.0;
    // [mollifier]
    double epsilon = 0.0;
    // [time]
    bool dt_auto = true;
    double dt = 0.0;
    double cfl_safety = 1.0;
    double t_final = 0.0;
    // [particles]
    std::size_t marker_count = 0;
    std::string family = "ball";
    BallDensity ball;
    // [fields]
    std::vector<FourierMode> u_modes;
    std::vector<FourierMode> b_modes;
    // [constants]
    bool explicit_constants = false;
    PhysicalConstants constants;
    // [output]
    std::string out_dir = "out";
    int diag_every = 1;
    int checkpoint_every = 0;
    // [run]
    bool deterministic = true;
    std::uint64_t seed = 1;

    // Set by the --project-init flag, never by a file key: non-solenoidal
    // mode lists are projected instead of rejected.
    bool project_init = false;
};

// Carries every violation found in one pass; what() joins them.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

RunConfig parse_config_text(const std::string& text, bool project_init = false);
RunConfig parse_config(const std::string& path, bool project_init = false);

// Canonical round-trippable rendering: fixed section and key order, %.17g
// numbers, one mode per line.
std::string dump_config(const RunConfig& cfg);

// Exact coefficient-space assembly of a mode list (no quadrature).
VectorField build_mode_field(const Grid& g, const std::vector<FourierMode>& modes);

// Grid, fields, markers, constants, and smoothing level from a parsed
// config. Marker sampling consumes the config seed when deterministic;
// otherwise a fresh random seed is drawn per call.
PlasmaState initial_state(const RunConfig& cfg);

} // namespace hvmhd
