#pragma once

#include "hvmhd/dynamics.hpp"

#include <vector>

namespace hvmhd {

// Velocity and magnetic fields sampled on a half-step time lattice: node j
// holds the fields at t0 + j*dt/2, so a run of `steps` full steps stores
// 2*steps + 1 nodes. The odd nodes carry the midpoint stage values, which is
// what the three-stage field update needs from a surrogate trajectory.
struct FieldTrajectory {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<VectorField> U;
    std::vector<VectorField> B;

    int steps() const { return U.empty() ? 0 : static_cast<int>((U.size() - 1) / 2); }
    double time_at(int node) const { return t0 + 0.5 * dt * node; }
};

// One application of the decoupling map: markers are pushed through the
// mollified surrogate fields alone, and the evolved (U, B) solve the field
// equations advected and stretched by the surrogate, so both subproblems are
// linear. The remainder samples measure the energy the coupling fails to
// return while the evolved velocity still disagrees with the surrogate,
//   R = q_h int (U - U~)^eps . (B~^eps x K) dx,
// evaluated at each midpoint; they vanish at a fixed point.
struct ApplyFResult {
    FieldTrajectory fields;
    ParticleEnsemble particles;
    std::vector<double> remainder;
    std::vector<double> remainder_times;
};

// Advances init through [0, T] with the surrogate supplying every carrier
// field. The surrogate must live on the same grid and the same time lattice
// (t0, dt, and 2*steps + 1 nodes with steps = T/dt); mismatches and
// non-solenoidal nodes are rejected up front.
ApplyFResult apply_F(const FieldTrajectory& surrogate, const PlasmaState& init, double T,
                     double dt);

// Runs the nonlinear stepper while recording its trajectory on the same
// half-step lattice, so direct runs and surrogate-driven runs can be
// compared node by node.
struct DirectRun {
    FieldTrajectory fields;
    PlasmaState final_state;
};

DirectRun record_nonlinear_run(PlasmaState state, double T, double dt);

// Picard iteration of the decoupling map, starting from the constant-in-time
// surrogate (U0, B0). Each sweep replaces the surrogate with the fields it
// produced; iteration stops when the sup-in-time L2 change of the pair drops
// below tol. Convergence is monitored, not guaranteed: running out of
// iterations returns the last iterate with converged = false rather than
// throwing.
struct FixedPointResult {
    FieldTrajectory fields;
    ParticleEnsemble particles;
    std::vector<double> remainder_history;
    std::vector<double> delta_history;
    int iterations = 0;
    bool converged = false;
};

FixedPointResult fixed_point_solve(const PlasmaState& init, double T, double dt, double tol,
                                   int max_iter);

// Existence horizon T_flat = C_eps * f_inf^{-1/5} * (2 E0)^{-4/5}: the time
// span over which one iteration sweep is guaranteed to stay inside the
// energy ball it started from. Monotone decreasing in the marker density
// bound and in the initial energy.
double tflat(double c_eps, double f_inf, double e0);

} // namespace hvmhd
