#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hvmhd/mollifier.hpp"
#include "hvmhd/particles.hpp"
#include "hvmhd/spectral_ops.hpp"
#include "hvmhd/util.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace hvmhd;

namespace {

VectorField uniform_field(const Grid& g, double cx, double cy, double cz) {
    VectorField v(g);
    v[0] = ScalarField::from_function(g, [cx](double, double, double) { return cx; });
    v[1] = ScalarField::from_function(g, [cy](double, double, double) { return cy; });
    v[2] = ScalarField::from_function(g, [cz](double, double, double) { return cz; });
    return v;
}

ParticleEnsemble random_markers(std::size_t count, double vmax, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(0.0, two_pi);
    std::uniform_real_distribution<double> vel(-vmax, vmax);
    std::uniform_real_distribution<double> wgt(0.1, 2.0);
    ParticleEnsemble ens;
    ens.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        ens.add({pos(rng), pos(rng), pos(rng)}, {vel(rng), vel(rng), vel(rng)}, wgt(rng));
    return ens;
}

// Reference integrator for the same characteristic ODE the push solves,
// using the same trilinear gather, so the two can be compared directly.
struct SampledFields {
    const Grid& g;
    std::array<std::vector<double>, 3> us, bs;

    SampledFields(const VectorField& U, const VectorField& B) : g(U.grid()) {
        for (int c = 0; c < 3; ++c) {
            us[c] = U[c].samples();
            bs[c] = B[c].samples();
        }
    }
    void rhs(const double s[6], double out[6], double chi) const {
        double px = wrap_torus(s[0]), py = wrap_torus(s[1]), pz = wrap_torus(s[2]);
        double u[3], b[3];
        for (int c = 0; c < 3; ++c) {
            u[c] = trilinear_sample(g, us[c], px, py, pz);
            b[c] = trilinear_sample(g, bs[c], px, py, pz);
        }
        double wx = s[3] - u[0], wy = s[4] - u[1], wz = s[5] - u[2];
        out[0] = s[3];
        out[1] = s[4];
        out[2] = s[5];
        out[3] = chi * (wy * b[2] - wz * b[1]);
        out[4] = chi * (wz * b[0] - wx * b[2]);
        out[5] = chi * (wx * b[1] - wy * b[0]);
    }
};

void rk4_orbit(const SampledFields& f, double chi, double dt, int steps, double s[6]) {
    for (int n = 0; n < steps; ++n) {
        double k1[6], k2[6], k3[6], k4[6], tmp[6];
        f.rhs(s, k1, chi);
        for (int i = 0; i < 6; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
        f.rhs(tmp, k2, chi);
        for (int i = 0; i < 6; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
        f.rhs(tmp, k3, chi);
        for (int i = 0; i < 6; ++i) tmp[i] = s[i] + dt * k3[i];
        f.rhs(tmp, k4, chi);
        for (int i = 0; i < 6; ++i)
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

} // namespace

TEST_CASE("force-free markers drift in straight lines") {
    Grid g = Grid::make(8, 1.0);
    VectorField U = uniform_field(g, 0.0, 0.0, 0.0);
    VectorField B(g); // zero
    ParticleEnsemble ens;
    ens.add({1.0, 2.0, 3.0}, {0.5, -0.25, 0.125}, 1.0);
    double dt = 0.2;
    push_particles(ens, U, B, dt);
    CHECK(ens.vx[0] == 0.5);
    CHECK(ens.vy[0] == -0.25);
    CHECK(ens.vz[0] == 0.125);
    CHECK(ens.x[0] == doctest::Approx(1.0 + dt * 0.5).epsilon(1e-15));
    CHECK(ens.y[0] == doctest::Approx(2.0 - dt * 0.25).epsilon(1e-15));
    CHECK(ens.z[0] == doctest::Approx(3.0 + dt * 0.125).epsilon(1e-15));
}

TEST_CASE("gyration in a uniform field closes after one period") {
    Grid g = Grid::make(8, 1.0);
    VectorField U = uniform_field(g, 0.0, 0.0, 0.0);
    VectorField B = uniform_field(g, 0.0, 0.0, 1.0);
    ParticleEnsemble ens;
    ens.add({pi, pi, pi}, {1.0, 0.0, 0.0}, 1.0);

    const int steps = 1000;
    const double dt = two_pi / steps;
    for (int n = 0; n < steps; ++n) push_particles(ens, U, B, dt);

    CHECK(std::abs(ens.vx[0] - 1.0) < 1e-10);
    CHECK(std::abs(ens.vy[0]) < 1e-10);
    CHECK(std::abs(ens.vz[0]) < 1e-10);
    double speed = std::sqrt(ens.vx[0] * ens.vx[0] + ens.vy[0] * ens.vy[0] +
                             ens.vz[0] * ens.vz[0]);
    CHECK(std::abs(speed - 1.0) < 1e-13);
}

TEST_CASE("first rotation step matches the exact solution") {
    Grid g = Grid::make(8, 1.0);
    VectorField U = uniform_field(g, 0.0, 0.0, 0.0);
    VectorField B = uniform_field(g, 0.0, 0.0, 1.0);
    ParticleEnsemble ens;
    ens.add({pi, pi, pi}, {1.0, 0.0, 0.0}, 1.0);
    double dt = 0.3;
    push_particles(ens, U, B, dt);
    // dV/dt = V x B with B = z_hat: V(t) = (cos t, -sin t, 0)
    CHECK(ens.vx[0] == doctest::Approx(std::cos(dt)).epsilon(1e-14));
    CHECK(ens.vy[0] == doctest::Approx(-std::sin(dt)).epsilon(1e-14));
}

TEST_CASE("speed relative to the stream is a rotation invariant") {
    Grid g = Grid::make(8, 1.0);
    VectorField U = uniform_field(g, 0.3, 0.0, 0.0);
    VectorField B = uniform_field(g, 0.0, 0.0, 2.0);
    std::mt19937_64 rng(7);
    ParticleEnsemble ens = random_markers(50, 1.0, rng);

    std::vector<double> w0(ens.size());
    for (std::size_t p = 0; p < ens.size(); ++p) {
        double dx = ens.vx[p] - 0.3;
        w0[p] = std::sqrt(dx * dx + ens.vy[p] * ens.vy[p] + ens.vz[p] * ens.vz[p]);
    }
    for (int n = 0; n < 1000; ++n) push_particles(ens, U, B, 0.01);
    for (std::size_t p = 0; p < ens.size(); ++p) {
        double dx = ens.vx[p] - 0.3;
        double w1 = std::sqrt(dx * dx + ens.vy[p] * ens.vy[p] + ens.vz[p] * ens.vz[p]);
        CHECK(std::abs(w1 - w0[p]) < 1e-12);
    }
}

TEST_CASE("push in a nonuniform field converges at second order to the ODE") {
    Grid g = Grid::make(16, 1.0);
    VectorField U(g), B(g);
    U[1] = ScalarField::from_function(g, [](double x, double, double) {
        return 0.4 * std::sin(x);
    });
    B[2] = ScalarField::from_function(g, [](double x, double, double) {
        return 1.0 + 0.3 * std::cos(x);
    });
    B[0] = ScalarField::from_function(g, [](double, double y, double) {
        return 0.2 * std::sin(y);
    });

    SampledFields sampled(U, B);
    const double T = 1.0;
    double ref[6] = {1.0, 2.0, 3.0, 0.7, -0.2, 0.4};
    rk4_orbit(sampled, 1.0, T / 4096.0, 4096, ref);

    auto run_push = [&](int steps) {
        ParticleEnsemble ens;
        ens.add({1.0, 2.0, 3.0}, {0.7, -0.2, 0.4}, 1.0);
        for (int n = 0; n < steps; ++n) push_particles(ens, U, B, T / steps);
        double ex = ens.x[0] - wrap_torus(ref[0]);
        double ey = ens.y[0] - wrap_torus(ref[1]);
        double ez = ens.z[0] - wrap_torus(ref[2]);
        double evx = ens.vx[0] - ref[3];
        double evy = ens.vy[0] - ref[4];
        double evz = ens.vz[0] - ref[5];
        return std::sqrt(ex * ex + ey * ey + ez * ez + evx * evx + evy * evy + evz * evz);
    };
    double e1 = run_push(64);
    double e2 = run_push(128);
    double e3 = run_push(256);
    CHECK(e1 / e2 > 3.0); // second order: halving dt cuts the error near 4x
    CHECK(e2 / e3 > 3.0);
    CHECK(e3 < 1e-4);
}

TEST_CASE("charge-to-mass ratio scales the rotation") {
    Grid g = Grid::make(8, 1.0);
    VectorField U = uniform_field(g, 0.0, 0.0, 0.0);
    VectorField B = uniform_field(g, 0.0, 0.0, 1.0);
    ParticleEnsemble ens;
    ens.add({pi, pi, pi}, {1.0, 0.0, 0.0}, 1.0);
    push_particles(ens, U, B, 0.25, 2.0); // chi = 2 doubles the angle
    CHECK(ens.vx[0] == doctest::Approx(std::cos(0.5)).epsilon(1e-14));
    CHECK(ens.vy[0] == doctest::Approx(-std::sin(0.5)).epsilon(1e-14));
}

TEST_CASE("weights are untouched by the push and positions stay wrapped") {
    Grid g = Grid::make(8, 1.0);
    std::mt19937_64 rng(11);
    ParticleEnsemble ens = random_markers(200, 3.0, rng);
    std::vector<double> w0 = ens.w;
    VectorField U = uniform_field(g, 0.1, -0.2, 0.05);
    VectorField B = uniform_field(g, 0.4, 0.4, 1.0);
    for (int n = 0; n < 50; ++n) push_particles(ens, U, B, 0.1);
    for (std::size_t p = 0; p < ens.size(); ++p) {
        CHECK(ens.w[p] == w0[p]);
        CHECK(ens.x[p] >= 0.0);
        CHECK(ens.x[p] < two_pi);
        CHECK(ens.y[p] >= 0.0);
        CHECK(ens.y[p] < two_pi);
        CHECK(ens.z[p] >= 0.0);
        CHECK(ens.z[p] < two_pi);
    }
}

TEST_CASE("NaN fields abort the push") {
    Grid g = Grid::make(8, 1.0);
    VectorField U(g), B(g);
    U[0].coeff(0, 0, 0) = cplx{std::nan(""), 0.0};
    ParticleEnsemble ens;
    ens.add({1.0, 1.0, 1.0}, {1.0, 0.0, 0.0}, 1.0);
    CHECK_THROWS_AS(push_particles(ens, U, B, 0.1), std::runtime_error);
}

TEST_CASE("deposited moments preserve the marker sums") {
    Grid g = Grid::make(16, 1.0);

    SUBCASE("single marker mass") {
        ParticleEnsemble ens;
        ens.add({1.234, 4.321, 2.5}, {0.3, 0.2, 0.1}, 1.0);
        Moments m = deposit_moments(ens, g);
        CHECK(m.n.integral() == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("marker at a node") {
        ParticleEnsemble ens;
        double h = g.spacing();
        ens.add({h * 3, h * 5, h * 7}, {2.0, 0.0, 0.0}, 3.0);
        Moments m = deposit_moments(ens, g);
        CHECK(m.K[0].integral() == doctest::Approx(6.0).epsilon(1e-13));
        CHECK(std::abs(m.K[1].integral()) < 1e-13);
        CHECK(std::abs(m.K[2].integral()) < 1e-13);
    }

    SUBCASE("random ensemble sums") {
        std::mt19937_64 rng(13);
        ParticleEnsemble ens = random_markers(5000, 2.0, rng);
        KahanSum sw, skx, sky, skz, s2;
        for (std::size_t p = 0; p < ens.size(); ++p) {
            sw.add(ens.w[p]);
            skx.add(ens.w[p] * ens.vx[p]);
            sky.add(ens.w[p] * ens.vy[p]);
            skz.add(ens.w[p] * ens.vz[p]);
            s2.add(ens.w[p] * (ens.vx[p] * ens.vx[p] + ens.vy[p] * ens.vy[p] +
                               ens.vz[p] * ens.vz[p]));
        }
        Moments m = deposit_moments(ens, g);
        CHECK(m.n.integral() == doctest::Approx(sw.value()).epsilon(1e-12));
        CHECK(m.K[0].integral() == doctest::Approx(skx.value()).epsilon(1e-12));
        CHECK(m.K[1].integral() == doctest::Approx(sky.value()).epsilon(1e-12));
        CHECK(m.K[2].integral() == doctest::Approx(skz.value()).epsilon(1e-12));
        CHECK(m.sigma2.integral() == doctest::Approx(s2.value()).epsilon(1e-12));
        CHECK(m.sigma2.integral() ==
              doctest::Approx(2.0 * particle_energy(ens)).epsilon(1e-12));
    }
}

TEST_CASE("uniform markers deposit a flat density") {
    Grid g = Grid::make(8, 1.0);
    std::mt19937_64 rng(17);
    const std::size_t count = 100000;
    std::uniform_real_distribution<double> pos(0.0, two_pi);
    ParticleEnsemble ens;
    ens.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        ens.add({pos(rng), pos(rng), pos(rng)}, {0.0, 0.0, 0.0}, 1.0);
    Moments m = deposit_moments(ens, g);
    auto samples = m.n.samples();
    double mean = count / std::pow(two_pi, 3);
    double per_cell = double(count) / g.size();
    double tol = 3.0 / std::sqrt(per_cell);
    for (double s : samples) CHECK(std::abs(s - mean) / mean < tol);
}

TEST_CASE("moments come out nyquist-free") {
    Grid g = Grid::make(8, 1.0);
    std::mt19937_64 rng(19);
    ParticleEnsemble ens = random_markers(1000, 1.0, rng);
    Moments m = deposit_moments(ens, g);
    int ny = g.nyquist();
    for (int j = 0; j < g.n; ++j)
        for (int k = 0; k < g.n; ++k) {
            CHECK(std::abs(m.n.coeff(ny, j, k)) == 0.0);
            CHECK(std::abs(m.K[0].coeff(j, ny, k)) == 0.0);
            CHECK(std::abs(m.sigma2.coeff(j, k, ny)) == 0.0);
        }
}

TEST_CASE("gather and scatter are adjoint against open-band test functions") {
    Grid g = Grid::make(8, 1.0);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    // phi must share the open-band convention: the deposit truncates the
    // Nyquist plane of the density, and that truncation is self-adjoint, so
    // pairings against Nyquist-free fields are untouched by it.
    ScalarField phi_field(g);
    for (int jx = 0; jx < g.n; ++jx)
        for (int jy = 0; jy < g.n; ++jy)
            for (int jz = 0; jz < g.n; ++jz)
                phi_field.coeff(jx, jy, jz) = cplx{dist(rng), dist(rng)};
    phi_field.enforce_hermitian();
    phi_field.zero_nyquist();
    auto phi = phi_field.samples();

    ParticleEnsemble ens = random_markers(500, 1.0, rng);
    Moments m = deposit_moments(ens, g);
    auto n_samples = m.n.samples();

    // sum_nodes n phi h^3 == sum_markers w phi(X): same bilinear form read
    // row-wise or column-wise. The transform round trip is the only noise.
    KahanSum lhs;
    for (std::size_t i = 0; i < phi.size(); ++i) lhs.add(n_samples[i] * phi[i]);
    double node_side = lhs.value() * g.cell_volume();

    KahanSum rhs;
    for (std::size_t p = 0; p < ens.size(); ++p)
        rhs.add(ens.w[p] * trilinear_sample(g, phi, ens.x[p], ens.y[p], ens.z[p]));

    CHECK(node_side == doctest::Approx(rhs.value()).epsilon(1e-12));
}

TEST_CASE("particle energy basics") {
    ParticleEnsemble empty;
    CHECK(particle_energy(empty) == 0.0);
    CHECK(max_speed(empty) == 0.0);

    ParticleEnsemble one;
    one.add({0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, 2.0);
    CHECK(particle_energy(one) == 4.0);
    CHECK(max_speed(one) == 2.0);
}

TEST_CASE("support radius bound formula and monotonicity") {
    CHECK(support_radius_bound(0.0, 3.0, 7.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(support_radius_bound(std::log(2.0), 1.0, 0.0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(support_radius_bound(-1.0, 1.0, 1.0), std::invalid_argument);

    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> dist(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        double t = dist(rng), c1 = dist(rng), c2 = dist(rng), d = 0.25;
        double base = support_radius_bound(t, c1, c2);
        CHECK(support_radius_bound(t + d, c1, c2) >= base);
        CHECK(support_radius_bound(t, c1 + d, c2) >= base);
        CHECK(support_radius_bound(t, c1, c2 + d) >= base);
    }
}

TEST_CASE("phase-space norm estimates") {
    SUBCASE("r = 1 is the exact total weight") {
        std::mt19937_64 rng(31);
        ParticleEnsemble ens = random_markers(1000, 1.0, rng);
        KahanSum s;
        for (double wi : ens.w) s.add(wi);
        CHECK(estimate_lr_norm(ens, 1.0, 0.5, 0.5) == s.value());
    }

    SUBCASE("sup estimate recovers the plateau height of the sharp ball") {
        BallDensity ball;
        ball.M = 2.0;
        MollifierSpec none(0.0);
        std::mt19937_64 rng(37);
        ParticleEnsemble ens = prepare_initial_f(ball, none, 1000000, rng);
        double est = estimate_lr_norm(ens, std::numeric_limits<double>::infinity(), pi, 0.5);
        CHECK(est == doctest::Approx(ball.M).epsilon(0.10));
    }

    SUBCASE("r = 2 estimate is stable under a frozen-field push") {
        BallDensity ball;
        MollifierSpec none(0.0);
        std::mt19937_64 rng(41);
        ParticleEnsemble ens = prepare_initial_f(ball, none, 200000, rng);

        Grid g = Grid::make(16, 1.0);
        VectorField U(g), B(g);
        U[0] = ScalarField::from_function(g, [](double, double y, double) {
            return 0.3 * std::sin(y);
        });
        B[2] = ScalarField::from_function(g, [](double x, double, double) {
            return 1.0 + 0.2 * std::cos(x);
        });
        double before = estimate_lr_norm(ens, 2.0, pi / 2.0, 0.5);
        for (int n = 0; n < 100; ++n) push_particles(ens, U, B, 0.01);
        double after = estimate_lr_norm(ens, 2.0, pi / 2.0, 0.5);
        CHECK(std::abs(after - before) / before < 0.02);
    }

    SUBCASE("parameter validation") {
        ParticleEnsemble ens;
        CHECK_THROWS_AS(estimate_lr_norm(ens, 0.5, 1.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(estimate_lr_norm(ens, 2.0, -1.0, 1.0), std::invalid_argument);
    }
}
