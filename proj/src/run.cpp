#include "hvmhd/run.hpp"

#include "hvmhd/diagnostics.hpp"
#include "hvmhd/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <utility>

namespace hvmhd {

namespace {

// Sup of marker speeds and smoothed-field magnitudes over the states a run
// visits. Every field a push samples belongs to a visited state (the two
// half-pushes of a step use the fields at its endpoints), so these suprema
// bound what the markers actually felt.
struct SupportTracker {
    bool active = false;
    double peak_speed = 0.0;
    double peak_field = 0.0;

    void observe(const PlasmaState& st) {
        if (!active) return;
        peak_speed = std::max(peak_speed, max_speed(st.particles));
        peak_field = std::max(peak_field, mollify_x(st.U, st.mollifier).max_abs());
        peak_field = std::max(peak_field, mollify_x(st.B, st.mollifier).max_abs());
    }
};

std::string checkpoint_name(const std::string& dir, std::uint64_t step) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "checkpoint_%08llu.hvmhd",
                  static_cast<unsigned long long>(step));
    return dir + "/" + buf;
}

RunResult run_loop(const RunConfig& cfg, PlasmaState st, RunningTotals totals,
                   const StepObserver& observer) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    const double remaining = cfg.t_final - st.t;
    if (remaining < -1e-12)
        throw std::invalid_argument("run: state time is already past t_final");

    // The guarded ceil gives whole steps covering [t, t_final]; a resumed run
    // reuses the frozen dt through the same formula, so its count is exactly
    // the original total minus the steps already taken.
    auto whole_steps = [](double span, double dt) {
        return span > 0.0 ? static_cast<std::uint64_t>(std::ceil(span / dt - 1e-9)) : 0;
    };
    std::uint64_t steps = 0;
    if (totals.dt > 0.0) {
        steps = whole_steps(remaining, totals.dt);
    } else if (remaining > 0.0) {
        if (cfg.dt_auto) {
            double dt0 = cfg.cfl_safety * cfl_dt(st);
            steps = whole_steps(remaining, dt0);
            totals.dt = remaining / static_cast<double>(steps);
        } else {
            totals.dt = cfg.dt;
            steps = whole_steps(remaining, cfg.dt);
        }
    }

    const std::string csv_path = cfg.out_dir + "/diagnostics.csv";
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("run: cannot open '" + csv_path + "' for writing");
    csv << diagnostics_csv_header << "\n";

    RunResult res{std::move(st), totals, csv_path, cfg.out_dir + "/final.hvmhd", steps, 0,
                  0.0,          0.0,    0.0};
    PlasmaState& state = res.final_state;

    if (res.totals.step_index == 0 && res.totals.e_total_initial == 0.0)
        res.totals.e_total_initial = total_energy(state).e_total;

    SupportTracker tracker{!state.particles.empty()};
    res.initial_max_speed = max_speed(state.particles);
    tracker.observe(state);
    if (observer) observer(state, res.totals);

    auto write_row = [&] {
        csv << diagnostics_csv_row(state, res.totals) << "\n";
        ++res.rows_written;
    };
    write_row();

    double rate_prev = dissipation_rate(state);
    for (std::uint64_t s = 1; s <= steps; ++s) {
        state = step(std::move(state), res.totals.dt);
        double rate = dissipation_rate(state);
        res.totals.cumulative_dissipation += 0.5 * (rate_prev + rate) * res.totals.dt;
        rate_prev = rate;
        ++res.totals.step_index;

        tracker.observe(state);
        if (observer) observer(state, res.totals);

        const bool last = s == steps;
        if (last || res.totals.step_index % static_cast<std::uint64_t>(cfg.diag_every) == 0)
            write_row();
        if (!last && cfg.checkpoint_every > 0 &&
            res.totals.step_index % static_cast<std::uint64_t>(cfg.checkpoint_every) == 0)
            write_checkpoint(checkpoint_name(cfg.out_dir, res.totals.step_index), state,
                             res.totals);
    }

    csv.close();
    write_checkpoint(res.final_checkpoint_path, state, res.totals);
    res.peak_marker_speed = tracker.peak_speed;
    res.peak_smoothed_field = tracker.peak_field;
    return res;
}

} // namespace

RunResult run_simulation(const RunConfig& cfg, const StepObserver& observer) {
    return run_loop(cfg, initial_state(cfg), RunningTotals{}, observer);
}

RunResult resume_simulation(const RunConfig& cfg, const std::string& checkpoint_path,
                            const StepObserver& observer) {
    Checkpoint ck = read_checkpoint(checkpoint_path);
    const PlasmaState& st = ck.state;
    if (st.grid().n != cfg.n)
        throw std::invalid_argument("resume: checkpoint grid n=" + std::to_string(st.grid().n) +
                                    " disagrees with config n=" + std::to_string(cfg.n));
    if (st.mollifier.epsilon() != cfg.epsilon)
        throw std::invalid_argument("resume: checkpoint epsilon disagrees with config");
    const PhysicalConstants &a = st.constants, &b = cfg.constants;
    if (a.q_h != b.q_h || a.m_h != b.m_h || a.kappa != b.kappa || a.eta != b.eta ||
        a.mu0 != b.mu0 || a.rho_bar != b.rho_bar)
        throw std::invalid_argument("resume: checkpoint constants disagree with config");
    return run_loop(cfg, std::move(ck.state), ck.totals, observer);
}

} // namespace hvmhd
