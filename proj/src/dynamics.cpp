#include "hvmhd/dynamics.hpp"

#include "hvmhd/spectral_ops.hpp"

#include <array>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvmhd {
namespace {

void require_finite(const VectorField& v, const char* what) {
    for (int c = 0; c < 3; ++c)
        for (const cplx& z : v[c].data())
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw std::runtime_error(std::string(what) + ": non-finite field value");
}

// Exact heat propagator exp(-nu |k|^2 s), used as the integrating factor.
// Real, radial and bounded by 1, so it preserves Hermitian symmetry and
// solenoidality bitwise and never amplifies a mode. The factor depends on k
// only through the integer |k|^2, so it is tabulated once per call.
void apply_heat(VectorField& v, double nu, double s) {
    if (nu == 0.0 || s == 0.0) return;
    const Grid& g = v.grid();
    const int half = g.n / 2;
    std::vector<double> damp(static_cast<std::size_t>(3 * half * half) + 1);
    for (std::size_t q = 0; q < damp.size(); ++q)
        damp[q] = std::exp(-nu * s * static_cast<double>(q));
    for (int c = 0; c < 3; ++c) {
        auto& data = v[c].data();
        for (int jx = 0; jx < g.n; ++jx) {
            const int kx = g.wave(jx);
            for (int jy = 0; jy < g.n; ++jy) {
                const int ky = g.wave(jy);
                std::size_t base = g.idx(jx, jy, 0);
                for (int jz = 0; jz < g.n; ++jz) {
                    const int kz = g.wave(jz);
                    data[base + jz] *= damp[static_cast<std::size_t>(kx * kx + ky * ky + kz * kz)];
                }
            }
        }
    }
}

// Moment samples on the padded product grid, computed once per step and
// shared by all three stages (the moments are frozen across the field
// update by construction).
struct FrozenMoments {
    int m = 0;
    std::vector<double> n_s;
    std::array<std::vector<double>, 3> K_s;
};

FrozenMoments freeze_moments(const Moments& mom, const Grid& g) {
    FrozenMoments fm;
    fm.m = detail::padded_size(g);
    fm.n_s = detail::padded_samples(mom.n, fm.m);
    for (int c = 0; c < 3; ++c)
        fm.K_s[c] = detail::padded_samples(mom.K[c], fm.m);
    return fm;
}

// Projected tendency pair for one stage: every advection, stretch and
// coupling term, but no diffusion (the integrating factor applies that
// exactly). (Ucm, Bcm) are the already-smoothed carrier fields; (U, B) the
// evolved pair. All products share one set of padded samples, which keeps
// the transform count per stage at 30 inverse + 12 forward.
void stage_tendency(const PhysicalConstants& pc, const MollifierSpec& moll,
                    const FrozenMoments& fm, const VectorField& Ucm, const VectorField& Bcm,
                    const VectorField& U, const VectorField& B, VectorField& Nu,
                    VectorField& Nb) {
    const Grid& g = U.grid();
    const int m = fm.m;
    const std::size_t len = fm.n_s.size();

    std::array<std::vector<double>, 3> ucm, bcm, us;
    std::array<std::vector<double>, 9> du, db; // [3*i + j] holds d_j of component i
    for (int c = 0; c < 3; ++c) {
        ucm[c] = detail::padded_samples(Ucm[c], m);
        bcm[c] = detail::padded_samples(Bcm[c], m);
        us[c] = detail::padded_samples(U[c], m);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            du[3 * i + j] = detail::padded_samples(derivative(U[i], j), m);
            db[3 * i + j] = detail::padded_samples(derivative(B[i], j), m);
        }

    const double c_stretch = 1.0 / (pc.rho_bar * pc.mu0);
    const double c_q = pc.q_h / pc.rho_bar;

    // Both cross products are formed pointwise on the padded grid.
    std::array<std::vector<double>, 3> uxb, bxk; // U x Bcm, Bcm x K
    for (int i = 0; i < 3; ++i) {
        uxb[i].resize(len);
        bxk[i].resize(len);
    }
    for (std::size_t p = 0; p < len; ++p) {
        uxb[0][p] = us[1][p] * bcm[2][p] - us[2][p] * bcm[1][p];
        uxb[1][p] = us[2][p] * bcm[0][p] - us[0][p] * bcm[2][p];
        uxb[2][p] = us[0][p] * bcm[1][p] - us[1][p] * bcm[0][p];
        bxk[0][p] = bcm[1][p] * fm.K_s[2][p] - bcm[2][p] * fm.K_s[1][p];
        bxk[1][p] = bcm[2][p] * fm.K_s[0][p] - bcm[0][p] * fm.K_s[2][p];
        bxk[2][p] = bcm[0][p] * fm.K_s[1][p] - bcm[1][p] * fm.K_s[0][p];
    }

    // n (U x Bcm) is a triple product: fold the cross product back to the
    // retained band and re-pad before the second multiplication, so each
    // binary product stays alias-free.
    std::array<std::vector<double>, 3> nuxb;
    for (int i = 0; i < 3; ++i) {
        ScalarField folded = detail::field_from_padded_samples(g, m, uxb[i]);
        nuxb[i] = detail::padded_samples(folded, m);
        for (std::size_t p = 0; p < len; ++p)
            nuxb[i][p] *= fm.n_s[p];
    }

    std::vector<double> acc(len);
    for (int i = 0; i < 3; ++i) {
        const auto *dui = &du[3 * i], *dbi = &db[3 * i];
        for (std::size_t p = 0; p < len; ++p) {
            const double adv =
                ucm[0][p] * dui[0][p] + ucm[1][p] * dui[1][p] + ucm[2][p] * dui[2][p];
            const double str =
                bcm[0][p] * dbi[0][p] + bcm[1][p] * dbi[1][p] + bcm[2][p] * dbi[2][p];
            acc[p] = -adv + c_stretch * str + c_q * nuxb[i][p];
        }
        Nu[i] = detail::field_from_padded_samples(g, m, acc);
        for (std::size_t p = 0; p < len; ++p) {
            const double adv =
                ucm[0][p] * dbi[0][p] + ucm[1][p] * dbi[1][p] + ucm[2][p] * dbi[2][p];
            const double str =
                bcm[0][p] * dui[0][p] + bcm[1][p] * dui[1][p] + bcm[2][p] * dui[2][p];
            acc[p] = -adv + str;
        }
        Nb[i] = detail::field_from_padded_samples(g, m, acc);
    }

    // The current coupling carries an outer smoothing, applied after the
    // cross product. That placement is what makes the work this term does on
    // the fluid cancel the energy the markers absorb: the smoothing transfers
    // onto U in the energy pairing because the multiplier is self-adjoint.
    VectorField bk(g);
    for (int i = 0; i < 3; ++i)
        bk[i] = detail::field_from_padded_samples(g, m, bxk[i]);
    bk = mollify_x(bk, moll);
    Nu.axpy(c_q, bk);

    Nu = leray_project(std::move(Nu));
    Nb = leray_project(std::move(Nb));
}

} // namespace

void advance_fields(const PhysicalConstants& pc, const MollifierSpec& moll, const Moments& mom,
                    double dt, VectorField& U, VectorField& B, const CarrierFn& carriers,
                    StageHook* hook) {
    if (!(dt > 0.0))
        throw std::invalid_argument("advance_fields: dt must be positive");
    const Grid& g = U.grid();
    require_same_grid(g, B.grid(), "advance_fields fields");
    require_same_grid(g, mom.n.grid(), "advance_fields moments");

    const double nu_u = pc.nu_u();
    const double nu_b = pc.nu_b();
    const FrozenMoments fm = freeze_moments(mom, g);

    if (hook)
        hook->stage(0, U, B);

    VectorField k1u(g), k1b(g), k2u(g), k2b(g), k3u(g), k3b(g);

    {
        auto [cu, cb] = carriers(0, U, B);
        stage_tendency(pc, moll, fm, cu, cb, U, B, k1u, k1b);
    }

    // Midpoint stage: E(dt/2) (u0 + (dt/2) k1).
    VectorField y2u = U;
    y2u.axpy(0.5 * dt, k1u);
    apply_heat(y2u, nu_u, 0.5 * dt);
    VectorField y2b = B;
    y2b.axpy(0.5 * dt, k1b);
    apply_heat(y2b, nu_b, 0.5 * dt);
    if (hook)
        hook->stage(1, y2u, y2b);

    {
        auto [cu, cb] = carriers(1, y2u, y2b);
        stage_tendency(pc, moll, fm, cu, cb, y2u, y2b, k2u, k2b);
    }

    // From here on k1 is only used under E(dt) and k2 only under E(dt/2),
    // in both the third stage value and the final combination, so the
    // propagators are applied once, in place. Every factor evolves forward
    // in time; nothing is ever undamped.
    VectorField eu0 = U;
    apply_heat(eu0, nu_u, dt);
    VectorField eb0 = B;
    apply_heat(eb0, nu_b, dt);
    apply_heat(k1u, nu_u, dt);
    apply_heat(k1b, nu_b, dt);
    apply_heat(k2u, nu_u, 0.5 * dt);
    apply_heat(k2b, nu_b, 0.5 * dt);

    // Full-step stage: E(dt) u0 + dt (-E(dt) k1 + 2 E(dt/2) k2).
    VectorField y3u = eu0;
    y3u.axpy(-dt, k1u);
    y3u.axpy(2.0 * dt, k2u);
    VectorField y3b = eb0;
    y3b.axpy(-dt, k1b);
    y3b.axpy(2.0 * dt, k2b);

    {
        auto [cu, cb] = carriers(2, y3u, y3b);
        stage_tendency(pc, moll, fm, cu, cb, y3u, y3b, k3u, k3b);
    }

    // Combination: E(dt) u0 + (dt/6) (E(dt) k1 + 4 E(dt/2) k2 + k3).
    U = std::move(eu0);
    U.axpy(dt / 6.0, k1u);
    U.axpy(4.0 * dt / 6.0, k2u);
    U.axpy(dt / 6.0, k3u);
    B = std::move(eb0);
    B.axpy(dt / 6.0, k1b);
    B.axpy(4.0 * dt / 6.0, k2b);
    B.axpy(dt / 6.0, k3b);
    U.set_divergence_free(true);
    B.set_divergence_free(true);

    if (hook)
        hook->stage(2, U, B);
}

VectorField rhs_momentum(const PlasmaState& state) {
    state.constants.validate();
    const Grid& g = state.grid();
    const Moments mom = deposit_moments(state.particles, g);
    const FrozenMoments fm = freeze_moments(mom, g);
    const VectorField um = mollify_x(state.U, state.mollifier);
    const VectorField bm = mollify_x(state.B, state.mollifier);
    VectorField nu(g), nb(g);
    stage_tendency(state.constants, state.mollifier, fm, um, bm, state.U, state.B, nu, nb);
    nu.axpy(state.constants.nu_u(), laplacian(state.U));
    require_finite(nu, "rhs_momentum");
    return nu;
}

VectorField rhs_induction(const PlasmaState& state) {
    state.constants.validate();
    const Grid& g = state.grid();
    const Moments mom = deposit_moments(state.particles, g);
    const FrozenMoments fm = freeze_moments(mom, g);
    const VectorField um = mollify_x(state.U, state.mollifier);
    const VectorField bm = mollify_x(state.B, state.mollifier);
    VectorField nu(g), nb(g);
    stage_tendency(state.constants, state.mollifier, fm, um, bm, state.U, state.B, nu, nb);
    nb.axpy(state.constants.nu_b(), laplacian(state.B));
    require_finite(nb, "rhs_induction");
    return nb;
}

PlasmaState step(PlasmaState state, double dt, StageHook* hook) {
    if (dt == 0.0)
        return state; // the zero-width step is the identity
    if (!(dt > 0.0))
        throw std::invalid_argument("step: dt must be positive");
    state.constants.validate();
    const Grid& g = state.grid();
    require_same_grid(g, state.B.grid(), "step fields");

    const double cfl = state.U.max_abs() * dt / g.spacing();
    if (cfl > 0.5)
        std::cerr << "step: advective CFL number " << cfl << " exceeds 0.5 at t = " << state.t
                  << "; the step size looks too large for this state\n";

    const double chi = state.constants.charge_to_mass();

    // First half push, in the smoothed fields at time t.
    if (!state.particles.empty()) {
        const VectorField um = mollify_x(state.U, state.mollifier);
        const VectorField bm = mollify_x(state.B, state.mollifier);
        push_particles(state.particles, um, bm, 0.5 * dt, chi);
    }

    // Moments deposited at the half-step marker positions and frozen across
    // the whole field update.
    const Moments mom = deposit_moments(state.particles, g);

    const MollifierSpec moll = state.mollifier;
    const CarrierFn carriers = [&moll](int, const VectorField& us, const VectorField& bs) {
        return std::pair(mollify_x(us, moll), mollify_x(bs, moll));
    };
    advance_fields(state.constants, state.mollifier, mom, dt, state.U, state.B, carriers, hook);

    // Second half push, in the updated smoothed fields.
    if (!state.particles.empty()) {
        const VectorField um = mollify_x(state.U, state.mollifier);
        const VectorField bm = mollify_x(state.B, state.mollifier);
        push_particles(state.particles, um, bm, 0.5 * dt, chi);
    }

    state.t += dt;

    require_finite(state.U, "step U");
    require_finite(state.B, "step B");
    if (state.U.div_residual() > 1e-11 || state.B.div_residual() > 1e-11)
        throw std::runtime_error("step: solenoidality lost (divergence residual above 1e-11)");
    return state;
}

double cfl_dt(const PlasmaState& state) {
    state.constants.validate();
    const double h = state.grid().spacing();
    const double nu = std::max(state.constants.nu_u(), state.constants.nu_b());
    double dt = h * h / (6.0 * nu);
    const double speed =
        std::max({state.U.max_abs(), state.B.max_abs(), max_speed(state.particles)});
    if (speed > 0.0)
        dt = std::min(dt, h / speed);
    return 0.5 * dt;
}

} // namespace hvmhd
