#include "hvmhd/fixed_point.hpp"

#include "hvmhd/spectral_ops.hpp"
#include "hvmhd/util.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace hvmhd {
namespace {

double pair_l2_diff(const VectorField& ua, const VectorField& ub, const VectorField& ba,
                    const VectorField& bb) {
    VectorField du = ua;
    du -= ub;
    VectorField db = ba;
    db -= bb;
    const double nu = du.l2_norm();
    const double nb = db.l2_norm();
    return std::sqrt(nu * nu + nb * nb);
}

int lattice_steps(double T, double dt, const char* what) {
    if (!(T > 0.0))
        throw std::invalid_argument(std::string(what) + ": horizon must be positive");
    if (!(dt > 0.0))
        throw std::invalid_argument(std::string(what) + ": dt must be positive");
    const double ratio = T / dt;
    const long steps = std::lround(ratio);
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(std::string(what) + ": dt must divide the horizon");
    return static_cast<int>(steps);
}

// Records the midpoint stage of one field update and, when markers are
// present, the energy-exchange remainder at that midpoint: the smoothed
// mismatch between the evolved velocity and the surrogate, paired against
// the smoothed surrogate magnetic field crossed with the current density.
struct MidpointProbe : StageHook {
    const VectorField* surrogate_u = nullptr;
    const VectorField* smoothed_b = nullptr;
    const Moments* moments = nullptr;
    const MollifierSpec* moll = nullptr;
    double q_h = 1.0;
    bool with_markers = false;

    VectorField mid_u, mid_b;
    double remainder = 0.0;

    void stage(int node, const VectorField& u, const VectorField& b) override {
        if (node != 1)
            return;
        mid_u = u;
        mid_b = b;
        remainder = 0.0;
        if (!with_markers)
            return;
        VectorField diff = u;
        diff -= *surrogate_u;
        remainder = q_h * l2_inner(mollify_x(diff, *moll), cross(*smoothed_b, moments->K));
    }
};

} // namespace

ApplyFResult apply_F(const FieldTrajectory& surrogate, const PlasmaState& init, double T,
                     double dt) {
    init.constants.validate();
    const int steps = lattice_steps(T, dt, "apply_F");
    const std::size_t nodes = 2 * static_cast<std::size_t>(steps) + 1;
    if (surrogate.U.size() != nodes || surrogate.B.size() != nodes)
        throw std::invalid_argument("apply_F: surrogate node count does not match the time lattice");
    if (std::abs(surrogate.t0 - init.t) > 1e-12 * (1.0 + std::abs(init.t)) ||
        std::abs(surrogate.dt - dt) > 1e-12 * dt)
        throw std::invalid_argument("apply_F: surrogate time lattice mismatch");
    const Grid& g = init.grid();
    for (std::size_t i = 0; i < nodes; ++i) {
        require_same_grid(g, surrogate.U[i].grid(), "apply_F surrogate");
        require_same_grid(g, surrogate.B[i].grid(), "apply_F surrogate");
        if (surrogate.U[i].div_residual() > 1e-10 || surrogate.B[i].div_residual() > 1e-10)
            throw std::invalid_argument(
                "apply_F: surrogate must be divergence-free at every stored time");
    }

    const MollifierSpec& moll = init.mollifier;
    const double chi = init.constants.charge_to_mass();

    VectorField U = init.U;
    VectorField B = init.B;
    ParticleEnsemble particles = init.particles;

    ApplyFResult out;
    out.fields.t0 = init.t;
    out.fields.dt = dt;
    out.fields.U.reserve(nodes);
    out.fields.B.reserve(nodes);
    out.fields.U.push_back(U);
    out.fields.B.push_back(B);
    out.remainder.reserve(static_cast<std::size_t>(steps));
    out.remainder_times.reserve(static_cast<std::size_t>(steps));

    MidpointProbe probe;
    probe.moll = &moll;
    probe.q_h = init.constants.q_h;
    probe.with_markers = !particles.empty();

    VectorField mu0 = mollify_x(surrogate.U[0], moll);
    VectorField mb0 = mollify_x(surrogate.B[0], moll);

    for (int j = 0; j < steps; ++j) {
        const std::size_t mid = 2 * static_cast<std::size_t>(j) + 1;
        const VectorField mu1 = mollify_x(surrogate.U[mid], moll);
        const VectorField mb1 = mollify_x(surrogate.B[mid], moll);
        VectorField mu2 = mollify_x(surrogate.U[mid + 1], moll);
        VectorField mb2 = mollify_x(surrogate.B[mid + 1], moll);

        if (!particles.empty())
            push_particles(particles, mu0, mb0, 0.5 * dt, chi);
        const Moments mom = deposit_moments(particles, g);

        probe.surrogate_u = &surrogate.U[mid];
        probe.smoothed_b = &mb1;
        probe.moments = &mom;
        const CarrierFn carriers = [&](int node, const VectorField&, const VectorField&) {
            if (node == 0)
                return std::pair(mu0, mb0);
            if (node == 1)
                return std::pair(mu1, mb1);
            return std::pair(mu2, mb2);
        };
        advance_fields(init.constants, moll, mom, dt, U, B, carriers, &probe);

        if (!particles.empty())
            push_particles(particles, mu2, mb2, 0.5 * dt, chi);

        if (!(std::isfinite(U.l2_norm()) && std::isfinite(B.l2_norm())))
            throw std::runtime_error("apply_F: field blowup at t = " +
                                     std::to_string(init.t + (j + 1) * dt));

        out.fields.U.push_back(std::move(probe.mid_u));
        out.fields.B.push_back(std::move(probe.mid_b));
        out.fields.U.push_back(U);
        out.fields.B.push_back(B);
        out.remainder.push_back(probe.remainder);
        out.remainder_times.push_back(init.t + (j + 0.5) * dt);

        mu0 = std::move(mu2);
        mb0 = std::move(mb2);
    }

    out.particles = std::move(particles);
    return out;
}

DirectRun record_nonlinear_run(PlasmaState state, double T, double dt) {
    const int steps = lattice_steps(T, dt, "record_nonlinear_run");

    struct Recorder : StageHook {
        VectorField mid_u, mid_b;
        void stage(int node, const VectorField& u, const VectorField& b) override {
            if (node == 1) {
                mid_u = u;
                mid_b = b;
            }
        }
    } recorder;

    FieldTrajectory fields;
    fields.t0 = state.t;
    fields.dt = dt;
    fields.U.reserve(2 * static_cast<std::size_t>(steps) + 1);
    fields.B.reserve(2 * static_cast<std::size_t>(steps) + 1);
    fields.U.push_back(state.U);
    fields.B.push_back(state.B);

    for (int j = 0; j < steps; ++j) {
        state = step(std::move(state), dt, &recorder);
        fields.U.push_back(std::move(recorder.mid_u));
        fields.B.push_back(std::move(recorder.mid_b));
        fields.U.push_back(state.U);
        fields.B.push_back(state.B);
    }
    return DirectRun{std::move(fields), std::move(state)};
}

FixedPointResult fixed_point_solve(const PlasmaState& init, double T, double dt, double tol,
                                   int max_iter) {
    if (!(tol > 0.0))
        throw std::invalid_argument("fixed_point_solve: tol must be positive");
    if (max_iter < 1)
        throw std::invalid_argument("fixed_point_solve: need at least one iteration");
    const int steps = lattice_steps(T, dt, "fixed_point_solve");
    const std::size_t nodes = 2 * static_cast<std::size_t>(steps) + 1;

    FieldTrajectory surrogate;
    surrogate.t0 = init.t;
    surrogate.dt = dt;
    surrogate.U.assign(nodes, init.U);
    surrogate.B.assign(nodes, init.B);

    FixedPointResult out;
    for (int k = 1; k <= max_iter; ++k) {
        ApplyFResult res = apply_F(surrogate, init, T, dt);

        double delta = 0.0;
        for (std::size_t i = 0; i < nodes; ++i)
            delta = std::max(delta, pair_l2_diff(res.fields.U[i], surrogate.U[i], res.fields.B[i],
                                                 surrogate.B[i]));
        double rmax = 0.0;
        for (const double r : res.remainder)
            rmax = std::max(rmax, std::abs(r));

        out.delta_history.push_back(delta);
        out.remainder_history.push_back(rmax);
        out.iterations = k;
        surrogate = std::move(res.fields);
        out.particles = std::move(res.particles);
        if (delta < tol) {
            out.converged = true;
            break;
        }
    }
    out.fields = std::move(surrogate);
    return out;
}

double tflat(double c_eps, double f_inf, double e0) {
    if (!(c_eps > 0.0) || !(f_inf > 0.0) || !(e0 > 0.0))
        throw std::invalid_argument("tflat: all arguments must be positive");
    return c_eps * std::pow(f_inf, -0.2) * std::pow(2.0 * e0, -0.8);
}

} // namespace hvmhd
