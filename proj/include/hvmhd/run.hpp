#pragma once

#include "hvmhd/config.hpp"
#include "hvmhd/io.hpp"

#include <functional>
#include <string>

namespace hvmhd {

// Called once with the initial state and once after every step; criterion
// suites use it to fold per-state checks into a run without storing states.
using StepObserver = std::function<void(const PlasmaState&, const RunningTotals&)>;

struct RunResult {
    PlasmaState final_state;
    RunningTotals totals;
    std::string csv_path;
    std::string final_checkpoint_path;
    std::uint64_t steps_taken = 0;
    int rows_written = 0;
    // Recorded suprema over every visited state, for the velocity-support
    // growth bound: marker speeds and smoothed-field magnitudes. Zero when
    // the run carries no markers.
    double initial_max_speed = 0.0;
    double peak_marker_speed = 0.0;
    double peak_smoothed_field = 0.0;
};

// Fresh run over [0, t_final]: builds the initial state from the config,
// freezes dt (given or CFL-derived, stretched to land exactly on t_final),
// writes <out>/diagnostics.csv, periodic checkpoints when configured, and
// <out>/final.hvmhd. The cumulative dissipation column integrates the
// gradient norms by the trapezoid rule on the step lattice.
RunResult run_simulation(const RunConfig& cfg, const StepObserver& observer = {});

// Continuation from a checkpoint: dt, step count, and the energy ledger
// resume from the stored totals, so an uninterrupted run and a
// checkpoint-restart pair produce bit-identical final states. The config
// must agree with the checkpoint on grid, smoothing, and constants.
RunResult resume_simulation(const RunConfig& cfg, const std::string& checkpoint_path,
                            const StepObserver& observer = {});

} // namespace hvmhd
