#include "hvmhd/mollifier.hpp"

#include "hvmhd/util.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace hvmhd {

namespace {

using boost::math::quadrature::gauss_kronrod;

// Unnormalized radial profile w(rho) = exp(-1/(1-4 rho^2)) and its first two
// derivatives, via u = 1/(1-4 rho^2), u' = 8 rho u^2:
//   w'  = -8 rho u^2 w
//   w'' = (64 rho^2 u^4 - 8 u^2 - 128 rho^2 u^3) w
// All three vanish to every order at rho = 1/2; past the support they are 0.
double bump(double rho) {
    double s = 1.0 - 4.0 * rho * rho;
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s);
}

double bump_d1(double rho) {
    double s = 1.0 - 4.0 * rho * rho;
    if (s <= 0.0) return 0.0;
    double u = 1.0 / s;
    return -8.0 * rho * u * u * bump(rho);
}

double bump_d2(double rho) {
    double s = 1.0 - 4.0 * rho * rho;
    if (s <= 0.0) return 0.0;
    double u = 1.0 / s;
    double u2 = u * u;
    double r2 = rho * rho;
    return (64.0 * r2 * u2 * u2 - 8.0 * u2 - 128.0 * r2 * u2 * u) * bump(rho);
}

double radial_integral(const std::function<double(double)>& f) {
    return gauss_kronrod<double, 61>::integrate(f, 0.0, 0.5, 15, 1e-14);
}

double normalization() {
    static const double c = 1.0 / (4.0 * pi * radial_integral([](double r) {
                                 return bump(r) * r * r;
                             }));
    return c;
}

// Frobenius norm of the Hessian of a radial function g(|x|):
// eigenvalues are g'' once and g'/r twice.
double hessian_frob(double rho) {
    double g2 = bump_d2(rho);
    double g1r = rho > 0.0 ? bump_d1(rho) / rho : bump_d2(0.0);
    return std::sqrt(g2 * g2 + 2.0 * g1r * g1r);
}

double radial_amplitude(int m, double rho) {
    switch (m) {
    case 0: return bump(rho);
    case 1: return std::abs(bump_d1(rho));
    case 2: return hessian_frob(rho);
    default:
        throw std::invalid_argument("mollifier_norm_constant: derivative order must be 0, 1 or 2");
    }
}

double radial_sup(int m) {
    // Coarse scan plus golden-section refinement; the profiles are smooth
    // with a single interior or endpoint maximum.
    const int scan = 4096;
    double best_r = 0.0, best = radial_amplitude(m, 0.0);
    for (int i = 1; i <= scan; ++i) {
        double r = 0.5 * i / scan;
        double v = radial_amplitude(m, r);
        if (v > best) { best = v; best_r = r; }
    }
    double a = std::max(0.0, best_r - 0.5 / scan);
    double b = std::min(0.5, best_r + 0.5 / scan);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = radial_amplitude(m, x1), f2 = radial_amplitude(m, x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = radial_amplitude(m, x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = radial_amplitude(m, x1);
        }
    }
    return std::max(best, std::max(f1, f2));
}

} // namespace

double theta0(double rho) { return normalization() * bump(rho); }
double theta0_normalization() { return normalization(); }
double theta0_peak() { return theta0(0.0); }

double theta0_second_moment() {
    static const double v = 4.0 * pi * normalization() *
                            radial_integral([](double r) { return bump(r) * r * r * r * r; });
    return v;
}

MollifierSpec::MollifierSpec(double epsilon)
    : epsilon_(epsilon), cache_(std::make_shared<Cache>()) {
    if (epsilon < 0.0) throw std::invalid_argument("MollifierSpec: epsilon must be nonnegative");
}

double MollifierSpec::multiplier_at(double kappa) const {
    if (kappa < 1e-9) return 1.0;
    // Radial Fourier transform of the unit kernel:
    //   m(kappa) = (4 pi c / kappa) \int_0^{1/2} w(r) r sin(kappa r) dr.
    // Not monotone and mildly negative in places; clamped so that smoothing
    // is always a contraction mode by mode.
    double integral = radial_integral([kappa](double r) { return bump(r) * r * std::sin(kappa * r); });
    double v = 4.0 * pi * normalization() * integral / kappa;
    return std::clamp(v, -1.0, 1.0);
}

const std::vector<double>& MollifierSpec::table_for(const Grid& g) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->tables.find(g.n);
    if (it != cache_->tables.end()) return *it->second;

    int half = g.nyquist();
    int max_k2 = 3 * half * half;
    auto table = std::make_unique<std::vector<double>>(max_k2 + 1);
    (*table)[0] = 1.0;
    for (int s = 1; s <= max_k2; ++s)
        (*table)[s] = is_identity() ? 1.0 : multiplier_at(epsilon_ * std::sqrt(double(s)));
    auto [pos, inserted] = cache_->tables.emplace(g.n, std::move(table));
    return *pos->second;
}

ScalarField mollify_x(const ScalarField& f, const MollifierSpec& spec) {
    if (spec.is_identity()) return f;
    const Grid& g = f.grid();
    const std::vector<double>& table = spec.table_for(g);
    ScalarField out = f;
    for (int jx = 0; jx < g.n; ++jx) {
        int kx = g.wave(jx);
        for (int jy = 0; jy < g.n; ++jy) {
            int ky = g.wave(jy);
            for (int jz = 0; jz < g.n; ++jz) {
                int kz = g.wave(jz);
                int s = kx * kx + ky * ky + kz * kz;
                if (s == 0) continue;
                out.coeff(jx, jy, jz) *= table[s];
            }
        }
    }
    return out;
}

VectorField mollify_x(const VectorField& v, const MollifierSpec& spec) {
    if (spec.is_identity()) return v;
    // The same real factor multiplies all three components of each mode, so
    // k . v_hat scales by it too: the divergence-free property survives.
    return VectorField::from_components(mollify_x(v[0], spec), mollify_x(v[1], spec),
                                        mollify_x(v[2], spec), v.divergence_free());
}

double mollifier_norm_constant(const MollifierSpec& spec, double r, int m) {
    if (!(r >= 1.0)) throw std::invalid_argument("mollifier_norm_constant: r must be in [1, inf]");
    if (m < 0) throw std::invalid_argument("mollifier_norm_constant: m must be nonnegative");

    double p = std::isinf(r) ? 1.0 : (r == 1.0 ? std::numeric_limits<double>::infinity()
                                               : r / (r - 1.0));
    double c = normalization();

    double unit_norm;
    if (std::isinf(p)) {
        unit_norm = c * radial_sup(m);
    } else {
        double integral = radial_integral([m, p](double rho) {
            return std::pow(radial_amplitude(m, rho), p) * rho * rho;
        });
        unit_norm = c * std::pow(4.0 * pi * integral, 1.0 / p);
    }

    double exponent = -m - 3.0 * (1.0 - 1.0 / p);
    if (spec.is_identity())
        return exponent == 0.0 ? unit_norm : std::numeric_limits<double>::infinity();
    return std::pow(spec.epsilon(), exponent) * unit_norm;
}

namespace {

std::array<double, 3> unit_sphere(std::mt19937_64& rng) {
    double z = 2.0 * uniform_unit(rng()) - 1.0;
    double phi = two_pi * uniform_unit(rng());
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

// Radius with density proportional to w(rho) rho^2 on [0, 1/2], by rejection
// under a flat envelope at the profile's known maximum.
double kernel_radius(std::mt19937_64& rng) {
    // sup of w(rho) rho^2 over [0, 1/2]; a hair of headroom keeps the
    // envelope valid against the quadrature value's own rounding.
    static const double qmax = 0.018934833706732009 * (1.0 + 1e-12);
    for (;;) {
        double rho = 0.5 * uniform_unit(rng());
        if (uniform_unit(rng()) * qmax <= bump(rho) * rho * rho) return rho;
    }
}

std::array<double, 3> kernel_draw(std::mt19937_64& rng) {
    double rho = kernel_radius(rng);
    auto d = unit_sphere(rng);
    return {rho * d[0], rho * d[1], rho * d[2]};
}

// Invert x + (a/k) sin(k x) = t on [0, 2 pi] (monotone for |a| <= 1):
// safeguarded Newton with a bisection bracket.
double invert_modulated_cdf(double a, int k, double t) {
    if (a == 0.0 || k == 0) return t;
    double lo = 0.0, hi = two_pi, x = t;
    for (int it = 0; it < 100; ++it) {
        double f = x + (a / k) * std::sin(k * x) - t;
        if (std::abs(f) < 1e-14) break;
        if (f > 0.0) hi = x; else lo = x;
        double df = 1.0 + a * std::cos(k * x);
        double step = df > 1e-12 ? x - f / df : 0.5 * (lo + hi);
        x = (step > lo && step < hi) ? step : 0.5 * (lo + hi);
    }
    return x;
}

} // namespace

ParticleEnsemble prepare_initial_f(const BallDensity& f0, const MollifierSpec& spec,
                                   std::size_t count, std::mt19937_64& rng) {
    if (f0.M < 0.0) throw std::invalid_argument("prepare_initial_f: density height must be >= 0");
    if (std::abs(f0.mod_amp) > 1.0)
        throw std::invalid_argument("prepare_initial_f: |mod_amp| > 1 makes the density negative");
    if (f0.v0 < 0.0) throw std::invalid_argument("prepare_initial_f: v0 must be >= 0");

    double eps = spec.epsilon();
    double v_cut = eps > 0.0 ? std::min(f0.v0, 1.0 / eps) : f0.v0;
    // The modulation integrates away over the torus, so the restricted mass
    // is exactly plateau x volume x velocity ball.
    double mass = f0.M * std::pow(two_pi, 3) * (4.0 * pi / 3.0) * v_cut * v_cut * v_cut;

    ParticleEnsemble ens;
    if (mass == 0.0 || count == 0) return ens;

    ens.reserve(count);
    const double weight = mass / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) {
        double x1 = invert_modulated_cdf(f0.mod_amp, f0.mod_k, two_pi * uniform_unit(rng()));
        double x2 = two_pi * uniform_unit(rng());
        double x3 = two_pi * uniform_unit(rng());

        double radius = v_cut * std::cbrt(uniform_unit(rng()));
        auto dir = unit_sphere(rng);
        std::array<double, 3> vel = {radius * dir[0], radius * dir[1], radius * dir[2]};

        std::array<double, 3> pos = {x1, x2, x3};
        if (eps > 0.0) {
            auto jx = kernel_draw(rng);
            auto jv = kernel_draw(rng);
            for (int c = 0; c < 3; ++c) {
                pos[c] = wrap_torus(pos[c] + eps * jx[c]);
                vel[c] += eps * jv[c];
            }
        } else {
            for (int c = 0; c < 3; ++c) pos[c] = wrap_torus(pos[c]);
        }
        ens.add(pos, vel, weight);
    }
    return ens;
}

} // namespace hvmhd
