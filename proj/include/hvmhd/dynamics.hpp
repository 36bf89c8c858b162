#pragma once

#include <functional>
#include <utility>

#include "hvmhd/state.hpp"

namespace hvmhd {

// Full momentum tendency at the state's current time, moments deposited from
// the state's own markers:
//   P[ -(U~.grad)U + (1/(rho mu0))(B~.grad)B + (q_h/rho) n (U x B~)
//      + (q_h/rho) smooth(B~ x K) ] + (kappa/rho) Lap U
// where ~ marks the smoothed field and P the solenoidal projection. The
// outer smoothing of the B x K coupling sits exactly there by design: it is
// what makes the particle and fluid energy exchange cancel identically.
VectorField rhs_momentum(const PlasmaState& state);

// P[ -(U~.grad)B + (B~.grad)U ] + (eta/mu0) Lap B
VectorField rhs_induction(const PlasmaState& state);

// One Strang-split step of size dt:
//   half particle push in the smoothed fields at time t,
//   full field update (integrating-factor diffusion, third-order explicit
//   stages on the projected advection/coupling terms, moments frozen from
//   the mid-step deposition),
//   half particle push in the updated smoothed fields.
// Internal stage values of (U, B) at (t, t + dt/2, t + dt) can be observed
// via the optional hook, which the fixed-point machinery uses to record
// trajectories at half-step cadence. dt = 0 returns the state unchanged;
// negative dt throws. Throws on NaN or lost solenoidality.
struct StageHook {
    // called with (node, U, B): node 0 before the update at time t,
    // node 1 with the midpoint stage value, node 2 with the completed step
    virtual void stage(int node, const VectorField& U, const VectorField& B) = 0;
    virtual ~StageHook() = default;
};

PlasmaState step(PlasmaState state, double dt, StageHook* hook = nullptr);

// Field update core shared by the nonlinear step and the surrogate-driven
// linear solve. Advances (U, B) by one explicit-stage round with frozen
// moments; the advecting / stretching / coupling carrier pair for each stage
// node comes from the callback, which receives (node, stage U, stage B) and
// returns the already-smoothed carriers. The nonlinear step feeds back the
// smoothed stage fields themselves; the fixed-point map feeds a surrogate
// trajectory, making the equations linear in the evolved pair.
using CarrierFn = std::function<std::pair<VectorField, VectorField>(
    int node, const VectorField& U, const VectorField& B)>;

void advance_fields(const PhysicalConstants& pc, const MollifierSpec& moll, const Moments& mom,
                    double dt, VectorField& U, VectorField& B, const CarrierFn& carriers,
                    StageHook* hook = nullptr);

// Largest stable-looking step: safety * min(diffusive, advective) with
// safety 0.5, h^2/(6 nu) against both diffusivities and h over the fastest
// of |U|, |B| and the fastest marker.
double cfl_dt(const PlasmaState& state);

} // namespace hvmhd
