#include "hvmhd/galerkin.hpp"

#include "hvmhd/spectral_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace hvmhd {
namespace {

const double vol_sqrt = std::pow(two_pi, 1.5);
const double norm_const = 1.0 / vol_sqrt;

std::array<double, 3> cross3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::array<double, 3> normalize3(std::array<double, 3> v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& c : v)
        c /= n;
    return v;
}

// Half-lattice representatives inside the open band, sorted by |k|^2 then
// lexicographically. The representative of the pair {k, -k} has its first
// nonzero component positive.
std::vector<std::array<int, 3>> half_lattice(const Grid& g) {
    const int kmax = g.n / 2 - 1;
    std::vector<std::array<int, 3>> reps;
    for (int kx = -kmax; kx <= kmax; ++kx)
        for (int ky = -kmax; ky <= kmax; ++ky)
            for (int kz = -kmax; kz <= kmax; ++kz) {
                if (kx == 0 && ky == 0 && kz == 0)
                    continue;
                const int lead = kx != 0 ? kx : (ky != 0 ? ky : kz);
                if (lead < 0)
                    continue;
                reps.push_back({kx, ky, kz});
            }
    std::sort(reps.begin(), reps.end(), [](const auto& p, const auto& q) {
        const int p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        const int q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        return std::tie(p2, p) < std::tie(q2, q);
    });
    return reps;
}

// Orthonormal polarization pair orthogonal to k, seeded from the coordinate
// axis least aligned with k (lowest index wins ties) so the construction is
// deterministic.
std::pair<std::array<double, 3>, std::array<double, 3>> polarization(const std::array<int, 3>& k) {
    int axis = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(k[i]) < std::abs(k[axis]))
            axis = i;
    std::array<double, 3> seed{0.0, 0.0, 0.0};
    seed[axis] = 1.0;
    const std::array<double, 3> kd{static_cast<double>(k[0]), static_cast<double>(k[1]),
                                   static_cast<double>(k[2])};
    const auto e1 = normalize3(cross3(kd, seed));
    const auto e2 = normalize3(cross3(normalize3(kd), e1));
    return {e1, e2};
}

std::size_t slot(const Grid& g, const std::array<int, 3>& k) {
    auto wrap = [&](int c) { return c >= 0 ? c : g.n + c; };
    return g.idx(wrap(k[0]), wrap(k[1]), wrap(k[2]));
}

// Composite Simpson on a uniform grid; an odd interval count gets the 3/8
// rule on its last three intervals. A single interval falls back to the
// trapezoid (there is nothing better two points can do).
double simpson(const std::vector<double>& f, double h) {
    const std::size_t m = f.size() - 1;
    if (m == 0)
        return 0.0;
    if (m == 1)
        return 0.5 * h * (f[0] + f[1]);
    const std::size_t even_end = (m % 2 == 0) ? m : m - 3;
    double s = 0.0;
    for (std::size_t i = 0; i + 2 <= even_end; i += 2)
        s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (m % 2 == 1)
        s += 3.0 * h / 8.0 * (f[m - 3] + 3.0 * f[m - 2] + 3.0 * f[m - 1] + f[m]);
    return s;
}

double sup_sq(const VectorField& v) {
    const double m = v.max_abs();
    return m * m;
}

} // namespace

void LinearMHDProblem::validate() const {
    if (!(T > 0.0))
        throw std::invalid_argument("LinearMHDProblem: horizon T must be positive");
    const Grid& gr = a.grid();
    for (const VectorField* v : {&b, &g, &h, &h1, &init_u, &init_B})
        require_same_grid(gr, v->grid(), "LinearMHDProblem");
    if (a.div_residual() > 1e-12 || b.div_residual() > 1e-12)
        throw std::invalid_argument("LinearMHDProblem: a and b must be divergence-free");
}

int GalerkinSystem::capacity(const Grid& g) {
    const int kmax = g.n / 2 - 1;
    const int band = 2 * kmax + 1;
    return 3 + 4 * ((band * band * band - 1) / 2);
}

GalerkinSystem::GalerkinSystem(const Grid& g, int n_modes) : grid_(g) {
    if (n_modes < 1)
        throw std::invalid_argument("galerkin_basis: need at least one mode");
    if (n_modes > capacity(g))
        throw std::invalid_argument("galerkin_basis: mode count exceeds grid capacity");

    modes_.reserve(static_cast<std::size_t>(n_modes));
    for (int i = 0; i < 3 && static_cast<int>(modes_.size()) < n_modes; ++i) {
        BasisMode m;
        m.e[static_cast<std::size_t>(i)] = 1.0;
        modes_.push_back(m);
    }
    for (const auto& k : half_lattice(g)) {
        if (static_cast<int>(modes_.size()) >= n_modes)
            break;
        const auto [e1, e2] = polarization(k);
        const int k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        for (const auto& e : {e1, e2})
            for (const auto phase : {BasisMode::Phase::cosine, BasisMode::Phase::sine}) {
                if (static_cast<int>(modes_.size()) >= n_modes)
                    break;
                modes_.push_back(BasisMode{k, e, phase, k2});
            }
    }
}

GalerkinSystem galerkin_basis(const Grid& g, int n_modes) { return GalerkinSystem(g, n_modes); }

VectorField GalerkinSystem::field(int j) const {
    std::vector<double> coef(static_cast<std::size_t>(size()), 0.0);
    coef[static_cast<std::size_t>(j)] = 1.0;
    return reconstruct(coef);
}

std::vector<double> GalerkinSystem::project(const VectorField& F) const {
    require_same_grid(grid_, F.grid(), "GalerkinSystem::project");
    std::vector<double> coef(modes_.size(), 0.0);
    for (std::size_t j = 0; j < modes_.size(); ++j) {
        const BasisMode& m = modes_[j];
        const std::size_t s = slot(grid_, m.k);
        cplx c{0.0, 0.0};
        for (int comp = 0; comp < 3; ++comp)
            c += m.e[static_cast<std::size_t>(comp)] * F[comp].data()[s];
        switch (m.phase) {
        case BasisMode::Phase::constant: coef[j] = vol_sqrt * c.real(); break;
        case BasisMode::Phase::cosine: coef[j] = std::sqrt(2.0) * vol_sqrt * c.real(); break;
        case BasisMode::Phase::sine: coef[j] = -std::sqrt(2.0) * vol_sqrt * c.imag(); break;
        }
    }
    return coef;
}

VectorField GalerkinSystem::reconstruct(const std::vector<double>& coef) const {
    if (coef.size() != modes_.size())
        throw std::invalid_argument("GalerkinSystem::reconstruct: coefficient count mismatch");
    VectorField out(grid_, true);
    for (std::size_t j = 0; j < modes_.size(); ++j) {
        const BasisMode& m = modes_[j];
        const double amp = coef[j] * norm_const;
        if (m.phase == BasisMode::Phase::constant) {
            for (int comp = 0; comp < 3; ++comp)
                out[comp].coeff(0, 0, 0) += amp * m.e[static_cast<std::size_t>(comp)];
            continue;
        }
        const std::size_t sp = slot(grid_, m.k);
        const std::size_t sm = slot(grid_, {-m.k[0], -m.k[1], -m.k[2]});
        const double half = 0.5 * std::sqrt(2.0) * amp;
        for (int comp = 0; comp < 3; ++comp) {
            const double ec = half * m.e[static_cast<std::size_t>(comp)];
            if (m.phase == BasisMode::Phase::cosine) {
                out[comp].data()[sp] += cplx(ec, 0.0);
                out[comp].data()[sm] += cplx(ec, 0.0);
            } else {
                out[comp].data()[sp] += cplx(0.0, -ec);
                out[comp].data()[sm] += cplx(0.0, ec);
            }
        }
    }
    return out;
}

LinearTrajectory integrate_linear_mhd(const LinearMHDProblem& p, int n_modes, double dt) {
    p.validate();
    if (!(dt > 0.0))
        throw std::invalid_argument("integrate_linear_mhd: dt must be positive");

    LinearTrajectory tr;
    tr.basis = GalerkinSystem(p.a.grid(), n_modes);
    const GalerkinSystem& gs = tr.basis;
    const std::size_t n = static_cast<std::size_t>(gs.size());

    const int steps = std::max(1, static_cast<int>(std::ceil(p.T / dt - 1e-12)));
    const double tau = p.T / steps;
    tr.dt = tau;

    const std::vector<double> hj = gs.project(p.h);
    const std::vector<double> h1j = gs.project(p.h1);
    const bool pure_diffusion =
        p.a.max_abs() == 0.0 && p.b.max_abs() == 0.0 && p.g.max_abs() == 0.0;

    // Nonstiff part of the right-hand side: everything except the exact
    // -|k|^2 diagonal.
    auto tendency = [&](const std::vector<double>& cu, const std::vector<double>& cb,
                        std::vector<double>& nu, std::vector<double>& nb) {
        if (pure_diffusion) {
            nu = hj;
            nb = h1j;
            return;
        }
        const VectorField u = gs.reconstruct(cu);
        const VectorField B = gs.reconstruct(cb);
        VectorField fu = cross(u, p.g);
        fu -= advect(p.a, u);
        fu += advect(p.b, B);
        VectorField fb = advect(p.b, u);
        fb -= advect(p.a, B);
        nu = gs.project(fu);
        nb = gs.project(fb);
        for (std::size_t j = 0; j < n; ++j) {
            nu[j] += hj[j];
            nb[j] += h1j[j];
        }
    };

    auto damp = [&](std::vector<double> c, double s) {
        for (std::size_t j = 0; j < n; ++j)
            c[j] *= std::exp(-static_cast<double>(gs.mode(static_cast<int>(j)).k2) * s);
        return c;
    };
    auto axpy = [&](std::vector<double>& y, double a, const std::vector<double>& x) {
        for (std::size_t j = 0; j < n; ++j)
            y[j] += a * x[j];
    };
    auto full_rhs = [&](const std::vector<double>& c, const std::vector<double>& nonstiff) {
        std::vector<double> d = nonstiff;
        for (std::size_t j = 0; j < n; ++j)
            d[j] -= static_cast<double>(gs.mode(static_cast<int>(j)).k2) * c[j];
        return d;
    };
    auto sup = [&](const std::vector<double>& c) {
        double m = 0.0;
        for (double v : c)
            m = std::max(m, std::abs(v));
        return m;
    };

    std::vector<double> cu = gs.project(p.init_u);
    std::vector<double> cb = gs.project(p.init_B);
    const double blowup = 1e10 * (1.0 + std::max(sup(cu), sup(cb)));

    tr.times.push_back(0.0);
    tr.u.push_back(cu);
    tr.B.push_back(cb);

    std::vector<double> k1u(n), k1b(n), k2u(n), k2b(n), k3u(n), k3b(n);
    for (int s = 0; s < steps; ++s) {
        tendency(cu, cb, k1u, k1b);
        tr.du.push_back(full_rhs(cu, k1u));
        tr.dB.push_back(full_rhs(cb, k1b));

        std::vector<double> y2u = cu, y2b = cb;
        axpy(y2u, 0.5 * tau, k1u);
        axpy(y2b, 0.5 * tau, k1b);
        y2u = damp(std::move(y2u), 0.5 * tau);
        y2b = damp(std::move(y2b), 0.5 * tau);
        tendency(y2u, y2b, k2u, k2b);

        const std::vector<double> eu = damp(cu, tau);
        const std::vector<double> eb = damp(cb, tau);
        const std::vector<double> ek1u = damp(k1u, tau);
        const std::vector<double> ek1b = damp(k1b, tau);
        const std::vector<double> ek2u = damp(k2u, 0.5 * tau);
        const std::vector<double> ek2b = damp(k2b, 0.5 * tau);

        std::vector<double> y3u = eu, y3b = eb;
        axpy(y3u, -tau, ek1u);
        axpy(y3u, 2.0 * tau, ek2u);
        axpy(y3b, -tau, ek1b);
        axpy(y3b, 2.0 * tau, ek2b);
        tendency(y3u, y3b, k3u, k3b);

        cu = eu;
        cb = eb;
        axpy(cu, tau / 6.0, ek1u);
        axpy(cu, 4.0 * tau / 6.0, ek2u);
        axpy(cu, tau / 6.0, k3u);
        axpy(cb, tau / 6.0, ek1b);
        axpy(cb, 4.0 * tau / 6.0, ek2b);
        axpy(cb, tau / 6.0, k3b);

        if (std::max(sup(cu), sup(cb)) > blowup)
            throw std::runtime_error("integrate_linear_mhd: coefficient blowup at t = " +
                                     std::to_string((s + 1) * tau) +
                                     " (step size too large for the advection)");

        tr.times.push_back((s + 1) * tau);
        tr.u.push_back(cu);
        tr.B.push_back(cb);
    }

    tendency(cu, cb, k1u, k1b);
    tr.du.push_back(full_rhs(cu, k1u));
    tr.dB.push_back(full_rhs(cb, k1b));
    return tr;
}

double verify_energy_identity(const LinearTrajectory& tr, const LinearMHDProblem& p) {
    const GalerkinSystem& gs = tr.basis;
    const std::size_t n = static_cast<std::size_t>(gs.size());
    const std::vector<double> hj = gs.project(p.h);
    const std::vector<double> h1j = gs.project(p.h1);

    auto energy = [&](std::size_t i) {
        double e = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            e += tr.u[i][j] * tr.u[i][j] + tr.B[i][j] * tr.B[i][j];
        return e;
    };

    const std::size_t count = tr.times.size();
    std::vector<double> dissipation(count), forcing(count);
    for (std::size_t i = 0; i < count; ++i) {
        double d = 0.0, f = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double k2 = static_cast<double>(gs.mode(static_cast<int>(j)).k2);
            d += k2 * (tr.u[i][j] * tr.u[i][j] + tr.B[i][j] * tr.B[i][j]);
            f += tr.u[i][j] * hj[j] + tr.B[i][j] * h1j[j];
        }
        dissipation[i] = d;
        forcing[i] = f;
    }

    const double lhs = energy(count - 1) - energy(0) + 2.0 * simpson(dissipation, tr.dt);
    const double rhs = 2.0 * simpson(forcing, tr.dt);
    return std::abs(lhs - rhs);
}

PtBound verify_energy_pt_bound(const LinearTrajectory& tr, const LinearMHDProblem& p) {
    const GalerkinSystem& gs = tr.basis;
    const std::size_t n = static_cast<std::size_t>(gs.size());
    const std::size_t count = tr.times.size();

    auto grad_sq = [&](std::size_t i) {
        double e = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            e += static_cast<double>(gs.mode(static_cast<int>(j)).k2) *
                 (tr.u[i][j] * tr.u[i][j] + tr.B[i][j] * tr.B[i][j]);
        return e;
    };

    const double h_sq = p.h.l2_norm() * p.h.l2_norm();
    const double h1_sq = p.h1.l2_norm() * p.h1.l2_norm();

    std::vector<double> deriv_sq(count), load(count);
    for (std::size_t i = 0; i < count; ++i) {
        double d = 0.0, u_sq = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            d += tr.du[i][j] * tr.du[i][j] + tr.dB[i][j] * tr.dB[i][j];
            u_sq += tr.u[i][j] * tr.u[i][j];
        }
        deriv_sq[i] = d;
        load[i] = grad_sq(i) + u_sq + h_sq + h1_sq;
    }

    PtBound out;
    const double factor = std::max({sup_sq(p.a), sup_sq(p.b), sup_sq(p.g), 1.0});
    out.lhs = grad_sq(count - 1) - grad_sq(0) + simpson(deriv_sq, tr.dt);
    out.rhs = 2.0 * factor * simpson(load, tr.dt);
    out.holds = out.lhs <= out.rhs + 1e-9 * (1.0 + std::abs(out.rhs));
    return out;
}

} // namespace hvmhd
