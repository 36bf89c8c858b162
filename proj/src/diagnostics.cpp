#include "hvmhd/diagnostics.hpp"

#include "hvmhd/particles.hpp"
#include "hvmhd/spectral_ops.hpp"
#include "hvmhd/util.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hvmhd {

namespace {

double coeff_sq(const VectorField& v) {
    KahanSum s;
    for (int c = 0; c < 3; ++c)
        for (const cplx& z : v[c].data()) s.add(std::norm(z));
    return s.value();
}

double grad_sq(const VectorField& v) {
    const Grid& g = v.grid();
    const int n = g.n;
    KahanSum s;
    for (int c = 0; c < 3; ++c) {
        const auto& d = v[c].data();
        std::size_t i = 0;
        for (int jx = 0; jx < n; ++jx) {
            double kx = g.wave(jx);
            for (int jy = 0; jy < n; ++jy) {
                double ky = g.wave(jy);
                for (int jz = 0; jz < n; ++jz, ++i) {
                    double kz = g.wave(jz);
                    s.add((kx * kx + ky * ky + kz * kz) * std::norm(d[i]));
                }
            }
        }
    }
    return two_pi * two_pi * two_pi * s.value();
}

// Trapezoid rule on a (possibly uneven) time lattice.
double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    KahanSum s;
    for (std::size_t j = 0; j + 1 < t.size(); ++j)
        s.add(0.5 * (v[j] + v[j + 1]) * (t[j + 1] - t[j]));
    return s.value();
}

} // namespace

EnergyReport total_energy(const PlasmaState& state) {
    const double vol = two_pi * two_pi * two_pi;
    EnergyReport rep;
    rep.e_fluid = 0.5 * vol * coeff_sq(state.U);
    rep.e_mag = 0.5 * vol * coeff_sq(state.B);
    rep.e_particles = particle_energy(state.particles);
    rep.e_total = rep.e_fluid + rep.e_mag + rep.e_particles;
    auto [r1, r2] = conversion_rates(state);
    rep.r1 = r1;
    rep.r2 = r2;
    rep.dissipation_rate = grad_sq(state.U) + grad_sq(state.B);
    return rep;
}

EnergyReport total_energy(const PlasmaState& state, double cumulative_dissipation,
                          double e_total_initial) {
    EnergyReport rep = total_energy(state);
    rep.cumulative_dissipation = cumulative_dissipation;
    rep.balance_residual = rep.e_total + cumulative_dissipation - e_total_initial;
    return rep;
}

std::pair<double, double> conversion_rates(const PlasmaState& state) {
    VectorField ub = cross(state.U, state.B);
    double r2 = l2_inner(curl(state.B), ub);
    double r1 = 0.0;
    if (!state.particles.empty()) {
        Moments mom = deposit_moments(state.particles, state.grid());
        r1 = l2_inner(ub, mom.K);
    }
    return {r1, r2};
}

double dissipation_rate(const PlasmaState& state) {
    return grad_sq(state.U) + grad_sq(state.B);
}

AuditFrame audit_frame(const PlasmaState& state) {
    const double vol = two_pi * two_pi * two_pi;
    AuditFrame fr;
    fr.t = state.t;
    fr.e_fluid = 0.5 * vol * coeff_sq(state.U);
    fr.e_mag = 0.5 * vol * coeff_sq(state.B);
    fr.e_particles = particle_energy(state.particles);
    auto [r1, r2] = conversion_rates(state);
    fr.r1 = r1;
    fr.r2 = r2;
    fr.grad_u_sq = grad_sq(state.U);
    fr.grad_b_sq = grad_sq(state.B);
    return fr;
}

ExchangeAudit energy_exchange_audit(const std::vector<AuditFrame>& history) {
    if (history.size() < 3)
        throw std::invalid_argument("energy_exchange_audit: need at least three frames");
    for (std::size_t j = 0; j + 1 < history.size(); ++j)
        if (!(history[j].t < history[j + 1].t))
            throw std::invalid_argument("energy_exchange_audit: frame times must increase");

    ExchangeAudit audit;
    for (std::size_t j = 1; j + 1 < history.size(); ++j) {
        const AuditFrame& lo = history[j - 1];
        const AuditFrame& mid = history[j];
        const AuditFrame& hi = history[j + 1];
        double inv_span = 1.0 / (hi.t - lo.t);

        double dp = (hi.e_particles - lo.e_particles) * inv_span;
        double df = (hi.e_fluid - lo.e_fluid) * inv_span;
        double dm = (hi.e_mag - lo.e_mag) * inv_span;

        audit.particles = std::max(audit.particles, std::abs(dp + mid.r1));
        audit.fluid = std::max(audit.fluid, std::abs(df - (mid.r1 - mid.r2 - mid.grad_u_sq)));
        audit.magnetic = std::max(audit.magnetic, std::abs(dm - (mid.r2 - mid.grad_b_sq)));
    }
    return audit;
}

ConservedQuantities conserved_quantities(const PlasmaState& state) {
    ConservedQuantities out;
    const ParticleEnsemble& ens = state.particles;
    KahanSum px, py, pz, mass;
    for (std::size_t p = 0; p < ens.size(); ++p) {
        px.add(ens.w[p] * ens.vx[p]);
        py.add(ens.w[p] * ens.vy[p]);
        pz.add(ens.w[p] * ens.vz[p]);
        mass.add(ens.w[p]);
    }
    out.momentum = {px.value() + state.U[0].integral(), py.value() + state.U[1].integral(),
                    pz.value() + state.U[2].integral()};
    out.mass = mass.value();
    return out;
}

double moment_bound_constant(double k) {
    if (!(k >= 0.0) || !(k <= 2.0))
        throw std::invalid_argument("moment_bound_constant: k must lie in [0, 2]");
    if (k == 2.0) return 2.0;
    return (5.0 / (3.0 + k)) * std::pow(4.0 * pi / (2.0 - k), (2.0 - k) / 5.0) *
           std::pow(2.0, (3.0 + k) / 5.0);
}

BoundReport moment_bound_report(const ScalarField& speed_moment, double f_inf,
                                double e_particles, double k, double tolerance) {
    if (!(k >= 0.0) || !(k <= 2.0))
        throw std::invalid_argument("moment_bound_report: k must lie in [0, 2]");
    if (!(f_inf > 0.0))
        throw std::invalid_argument("moment_bound_report: f_inf must be positive");
    if (!(e_particles >= 0.0))
        throw std::invalid_argument("moment_bound_report: e_particles must be nonnegative");

    const Grid& g = speed_moment.grid();
    const double p = 5.0 / (3.0 + k);
    KahanSum s;
    for (double v : speed_moment.samples()) s.add(std::pow(std::abs(v), p));
    double lhs = std::pow(s.value() * g.cell_volume(), 1.0 / p);

    double rhs = moment_bound_constant(k) * std::pow(f_inf, (2.0 - k) / 5.0) *
                 std::pow(e_particles, (3.0 + k) / 5.0);

    BoundReport rep;
    rep.k = k;
    rep.lhs_norm = lhs;
    rep.rhs_bound = rhs;
    rep.ratio = rhs > 0.0 ? lhs / rhs
                          : (lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    rep.holds = lhs <= rhs * (1.0 + tolerance);
    return rep;
}

double density_sup(const BallDensity& f0) {
    return f0.M * (1.0 + std::abs(f0.mod_amp));
}

namespace {

// Compactly supported radial bump in velocity, exp(-1/(1 - |v/R|^2)) inside
// the ball of radius R and zero outside, with its gradient.
struct VelocityBump {
    double inv_r2;

    double value(const std::array<double, 3>& v) const {
        double q = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * inv_r2;
        return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
    }
    std::array<double, 3> grad(const std::array<double, 3>& v) const {
        double q = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * inv_r2;
        if (q >= 1.0) return {0.0, 0.0, 0.0};
        double om = 1.0 - q;
        double dq = -std::exp(-1.0 / om) / (om * om) * 2.0 * inv_r2;
        return {dq * v[0], dq * v[1], dq * v[2]};
    }
};

KineticTest bump_test(std::string label, int axis, bool use_sin,
                      std::function<double(double)> time, std::function<double(double)> time_dot) {
    VelocityBump bump{1.0 / 16.0};
    KineticTest kt;
    kt.label = std::move(label);
    kt.time = std::move(time);
    kt.time_dot = std::move(time_dot);
    if (axis < 0) {
        kt.space = [](const std::array<double, 3>&) { return 1.0; };
        kt.space_grad = [](const std::array<double, 3>&) {
            return std::array<double, 3>{0.0, 0.0, 0.0};
        };
    } else {
        kt.space = [axis, use_sin](const std::array<double, 3>& x) {
            return use_sin ? std::sin(x[axis]) : std::cos(x[axis]);
        };
        kt.space_grad = [axis, use_sin](const std::array<double, 3>& x) {
            std::array<double, 3> grd{0.0, 0.0, 0.0};
            grd[axis] = use_sin ? std::cos(x[axis]) : -std::sin(x[axis]);
            return grd;
        };
    }
    kt.vel = [bump](const std::array<double, 3>& v) { return bump.value(v); };
    kt.vel_grad = [bump](const std::array<double, 3>& v) { return bump.grad(v); };
    return kt;
}

} // namespace

WeakTestSuite standard_weak_suite(const Grid& g) {
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    auto ramp = [](double t) { return t; };
    auto affine = [](double t) { return 1.0 + 0.5 * t; };
    auto half = [](double) { return 0.5; };

    WeakTestSuite suite;
    suite.kinetic.push_back(bump_test("bump", -1, false, one, zero));
    suite.kinetic.push_back(bump_test("cos1 bump", 0, false, affine, half));
    suite.kinetic.push_back(bump_test("sin2 bump ramp", 1, true, ramp, one));

    FieldTest mean;
    mean.label = "mean e1";
    mean.time = one;
    mean.time_dot = zero;
    mean.shape = VectorField::from_components(
        ScalarField::from_function(g, [](double, double, double) { return 1.0; }),
        ScalarField(g), ScalarField(g));
    suite.field.push_back(std::move(mean));

    FieldTest helical;
    helical.label = "helical x1";
    helical.time = affine;
    helical.time_dot = half;
    helical.shape = VectorField::from_components(
        ScalarField(g),
        ScalarField::from_function(g, [](double x, double, double) { return std::cos(x); }),
        ScalarField::from_function(g, [](double x, double, double) { return std::sin(x); }));
    suite.field.push_back(std::move(helical));

    FieldTest swirl;
    swirl.label = "swirl x3 ramp";
    swirl.time = ramp;
    swirl.time_dot = one;
    swirl.shape = VectorField::from_components(
        ScalarField::from_function(g, [](double, double, double z) { return std::sin(z); }),
        ScalarField::from_function(g, [](double, double, double z) { return std::cos(z); }),
        ScalarField(g));
    suite.field.push_back(std::move(swirl));

    return suite;
}

namespace {

// Everything the marker loops need from one history frame: sampled carrier
// values at every marker position.
struct MarkerFields {
    std::vector<double> ux, uy, uz, bx, by, bz;
};

MarkerFields sample_at_markers(const PlasmaState& st) {
    const Grid& g = st.grid();
    const ParticleEnsemble& ens = st.particles;
    std::array<std::vector<double>, 3> su, sb;
    for (int c = 0; c < 3; ++c) {
        su[c] = st.U[c].samples();
        sb[c] = st.B[c].samples();
    }
    MarkerFields mf;
    std::size_t np = ens.size();
    mf.ux.resize(np); mf.uy.resize(np); mf.uz.resize(np);
    mf.bx.resize(np); mf.by.resize(np); mf.bz.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
        mf.ux[p] = trilinear_sample(g, su[0], ens.x[p], ens.y[p], ens.z[p]);
        mf.uy[p] = trilinear_sample(g, su[1], ens.x[p], ens.y[p], ens.z[p]);
        mf.uz[p] = trilinear_sample(g, su[2], ens.x[p], ens.y[p], ens.z[p]);
        mf.bx[p] = trilinear_sample(g, sb[0], ens.x[p], ens.y[p], ens.z[p]);
        mf.by[p] = trilinear_sample(g, sb[1], ens.x[p], ens.y[p], ens.z[p]);
        mf.bz[p] = trilinear_sample(g, sb[2], ens.x[p], ens.y[p], ens.z[p]);
    }
    return mf;
}

} // namespace

std::vector<WeakResidualRow> weak_residual(const std::vector<PlasmaState>& history,
                                           const WeakTestSuite& suite) {
    if (history.size() < 2)
        throw std::invalid_argument("weak_residual: history needs at least two frames");
    const Grid& g = history.front().grid();
    for (const PlasmaState& st : history) require_same_grid(st.grid(), g, "weak_residual");
    for (std::size_t j = 0; j + 1 < history.size(); ++j)
        if (!(history[j].t < history[j + 1].t))
            throw std::invalid_argument("weak_residual: frame times must increase");
    for (const FieldTest& ft : suite.field) {
        require_same_grid(ft.shape.grid(), g, "weak_residual");
        if (ft.shape.div_residual() > 1e-10)
            throw std::invalid_argument("weak_residual: test shape must be divergence-free");
    }

    const std::size_t m = history.size();
    std::vector<double> times(m);
    for (std::size_t j = 0; j < m; ++j) times[j] = history[j].t;

    // Per-test time series of the boundary pairings and interior integrands.
    struct KineticSeries {
        std::vector<double> pairing, interior;
    };
    struct FieldSeries {
        std::vector<double> pair_u, pair_b, rhs_u, rhs_b;
    };
    std::vector<KineticSeries> ks(suite.kinetic.size());
    for (auto& s : ks) {
        s.pairing.resize(m);
        s.interior.resize(m);
    }
    std::vector<FieldSeries> fs(suite.field.size());
    for (auto& s : fs) {
        s.pair_u.resize(m);
        s.pair_b.resize(m);
        s.rhs_u.resize(m);
        s.rhs_b.resize(m);
    }

    // Frame-independent pieces of the field tests: the viscous term pairs the
    // evolved field against the shape's Laplacian, and the interaction term
    // needs the shape sampled at marker positions.
    struct FieldWork {
        VectorField lap;
        std::array<std::vector<double>, 3> samp;
    };
    std::vector<FieldWork> fw;
    fw.reserve(suite.field.size());
    for (const FieldTest& ft : suite.field)
        fw.push_back({laplacian(ft.shape),
                      {ft.shape[0].samples(), ft.shape[1].samples(), ft.shape[2].samples()}});

    const bool need_markers = !suite.kinetic.empty() || !suite.field.empty();

    for (std::size_t j = 0; j < m; ++j) {
        const PlasmaState& st = history[j];
        const ParticleEnsemble& ens = st.particles;

        MarkerFields mf;
        if (need_markers && !ens.empty()) mf = sample_at_markers(st);

        for (std::size_t q = 0; q < suite.kinetic.size(); ++q) {
            const KineticTest& kt = suite.kinetic[q];
            KahanSum pairing, interior;
            for (std::size_t p = 0; p < ens.size(); ++p) {
                std::array<double, 3> x{ens.x[p], ens.y[p], ens.z[p]};
                std::array<double, 3> v{ens.vx[p], ens.vy[p], ens.vz[p]};
                double xs = kt.space(x);
                double wv = kt.vel(v);
                pairing.add(ens.w[p] * xs * wv);

                auto gx = kt.space_grad(x);
                auto gv = kt.vel_grad(v);
                double transport = (v[0] * gx[0] + v[1] * gx[1] + v[2] * gx[2]) * wv;
                double rx = mf.ux[p] - v[0], ry = mf.uy[p] - v[1], rz = mf.uz[p] - v[2];
                double fx = ry * mf.bz[p] - rz * mf.by[p];
                double fy = rz * mf.bx[p] - rx * mf.bz[p];
                double fz = rx * mf.by[p] - ry * mf.bx[p];
                double force = (fx * gv[0] + fy * gv[1] + fz * gv[2]) * xs;
                interior.add(ens.w[p] * (transport - force));
            }
            ks[q].pairing[j] = pairing.value();
            ks[q].interior[j] = interior.value();
        }

        for (std::size_t q = 0; q < suite.field.size(); ++q) {
            const FieldTest& ft = suite.field[q];
            fs[q].pair_u[j] = l2_inner(st.U, ft.shape);
            fs[q].pair_b[j] = l2_inner(st.B, ft.shape);

            VectorField adv_u = advect(st.U, ft.shape);
            VectorField adv_b = advect(st.B, ft.shape);
            double tens_u = l2_inner(st.U, adv_u) - l2_inner(st.B, adv_b);
            double tens_b = l2_inner(st.B, adv_u) - l2_inner(st.U, adv_b);
            double visc_u = -l2_inner(st.U, fw[q].lap);
            double visc_b = -l2_inner(st.B, fw[q].lap);

            KahanSum inter;
            for (std::size_t p = 0; p < ens.size(); ++p) {
                double vsx = trilinear_sample(g, fw[q].samp[0], ens.x[p], ens.y[p], ens.z[p]);
                double vsy = trilinear_sample(g, fw[q].samp[1], ens.x[p], ens.y[p], ens.z[p]);
                double vsz = trilinear_sample(g, fw[q].samp[2], ens.x[p], ens.y[p], ens.z[p]);
                double cx = mf.uy[p] * mf.bz[p] - mf.uz[p] * mf.by[p] +
                            mf.by[p] * ens.vz[p] - mf.bz[p] * ens.vy[p];
                double cy = mf.uz[p] * mf.bx[p] - mf.ux[p] * mf.bz[p] +
                            mf.bz[p] * ens.vx[p] - mf.bx[p] * ens.vz[p];
                double cz = mf.ux[p] * mf.by[p] - mf.uy[p] * mf.bx[p] +
                            mf.bx[p] * ens.vy[p] - mf.by[p] * ens.vx[p];
                inter.add(ens.w[p] * (cx * vsx + cy * vsy + cz * vsz));
            }
            fs[q].rhs_u[j] = tens_u - visc_u + inter.value();
            fs[q].rhs_b[j] = tens_b - visc_b;
        }
    }

    std::vector<WeakResidualRow> rows;
    std::vector<double> scratch(m);
    auto weighted = [&](const std::vector<double>& series,
                        const std::function<double(double)>& w) -> const std::vector<double>& {
        for (std::size_t j = 0; j < m; ++j) scratch[j] = w(times[j]) * series[j];
        return scratch;
    };

    for (std::size_t q = 0; q < suite.kinetic.size(); ++q) {
        const KineticTest& kt = suite.kinetic[q];
        WeakResidualRow row;
        row.test = kt.label;
        row.equation = "kinetic";
        row.lhs = kt.time(times.back()) * ks[q].pairing.back() -
                  kt.time(times.front()) * ks[q].pairing.front() -
                  trapezoid(times, weighted(ks[q].pairing, kt.time_dot));
        row.rhs = trapezoid(times, weighted(ks[q].interior, kt.time));
        row.residual = std::abs(row.lhs - row.rhs);
        rows.push_back(std::move(row));
    }

    for (std::size_t q = 0; q < suite.field.size(); ++q) {
        const FieldTest& ft = suite.field[q];
        WeakResidualRow mom;
        mom.test = ft.label;
        mom.equation = "momentum";
        mom.lhs = ft.time(times.back()) * fs[q].pair_u.back() -
                  ft.time(times.front()) * fs[q].pair_u.front() -
                  trapezoid(times, weighted(fs[q].pair_u, ft.time_dot));
        mom.rhs = trapezoid(times, weighted(fs[q].rhs_u, ft.time));
        mom.residual = std::abs(mom.lhs - mom.rhs);
        rows.push_back(std::move(mom));

        WeakResidualRow ind;
        ind.test = ft.label;
        ind.equation = "induction";
        ind.lhs = ft.time(times.back()) * fs[q].pair_b.back() -
                  ft.time(times.front()) * fs[q].pair_b.front() -
                  trapezoid(times, weighted(fs[q].pair_b, ft.time_dot));
        ind.rhs = trapezoid(times, weighted(fs[q].rhs_b, ft.time));
        ind.residual = std::abs(ind.lhs - ind.rhs);
        rows.push_back(std::move(ind));
    }

    return rows;
}

} // namespace hvmhd
