#include "hvmhd/particles.hpp"

#include "hvmhd/util.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

namespace hvmhd {

namespace {

struct CicStencil {
    int i0[3], i1[3];
    double f1[3]; // fraction toward the upper node
};

CicStencil locate(const Grid& g, double px, double py, double pz) {
    const double inv_h = g.n / two_pi;
    const double p[3] = {px, py, pz};
    CicStencil s;
    for (int a = 0; a < 3; ++a) {
        double u = p[a] * inv_h;
        int i = static_cast<int>(std::floor(u));
        s.f1[a] = u - i;
        i %= g.n;
        if (i < 0) i += g.n;
        s.i0[a] = i;
        s.i1[a] = (i + 1) % g.n;
    }
    return s;
}

} // namespace

double trilinear_sample(const Grid& g, const std::vector<double>& samples, double px, double py,
                        double pz) {
    CicStencil s = locate(g, px, py, pz);
    double out = 0.0;
    for (int a = 0; a < 2; ++a) {
        double wx = a ? s.f1[0] : 1.0 - s.f1[0];
        int ix = a ? s.i1[0] : s.i0[0];
        for (int b = 0; b < 2; ++b) {
            double wy = b ? s.f1[1] : 1.0 - s.f1[1];
            int iy = b ? s.i1[1] : s.i0[1];
            for (int c = 0; c < 2; ++c) {
                double wz = c ? s.f1[2] : 1.0 - s.f1[2];
                int iz = c ? s.i1[2] : s.i0[2];
                out += wx * wy * wz * samples[g.idx(ix, iy, iz)];
            }
        }
    }
    return out;
}

void push_particles(ParticleEnsemble& ens, const VectorField& U, const VectorField& B, double dt,
                    double charge_to_mass) {
    if (dt <= 0.0) throw std::invalid_argument("push_particles: dt must be positive");
    require_same_grid(U.grid(), B.grid(), "push_particles");
    const Grid& g = U.grid();

    std::array<std::vector<double>, 3> us, bs;
    for (int c = 0; c < 3; ++c) {
        us[c] = U[c].samples();
        bs[c] = B[c].samples();
        for (double v : us[c])
            if (std::isnan(v)) throw std::runtime_error("push_particles: NaN in velocity field");
        for (double v : bs[c])
            if (std::isnan(v)) throw std::runtime_error("push_particles: NaN in magnetic field");
    }

    const double half = 0.5 * dt;
    parallel_for(0, ens.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            double px = wrap_torus(ens.x[p] + half * ens.vx[p]);
            double py = wrap_torus(ens.y[p] + half * ens.vy[p]);
            double pz = wrap_torus(ens.z[p] + half * ens.vz[p]);

            double ugx = trilinear_sample(g, us[0], px, py, pz);
            double ugy = trilinear_sample(g, us[1], px, py, pz);
            double ugz = trilinear_sample(g, us[2], px, py, pz);
            double bgx = trilinear_sample(g, bs[0], px, py, pz);
            double bgy = trilinear_sample(g, bs[1], px, py, pz);
            double bgz = trilinear_sample(g, bs[2], px, py, pz);

            double wx = ens.vx[p] - ugx;
            double wy = ens.vy[p] - ugy;
            double wz = ens.vz[p] - ugz;

            double bmag = std::sqrt(bgx * bgx + bgy * bgy + bgz * bgz);
            if (bmag > 0.0) {
                // dW/dt = chi W x B is a rigid rotation about -B_hat with
                // angular speed chi |B|; apply it exactly for this step.
                double kx = -bgx / bmag, ky = -bgy / bmag, kz = -bgz / bmag;
                double phi = charge_to_mass * bmag * dt;
                double cphi = std::cos(phi), sphi = std::sin(phi);
                double kdw = kx * wx + ky * wy + kz * wz;
                double cx = ky * wz - kz * wy;
                double cy = kz * wx - kx * wz;
                double cz = kx * wy - ky * wx;
                double rx = wx * cphi + cx * sphi + kx * kdw * (1.0 - cphi);
                double ry = wy * cphi + cy * sphi + ky * kdw * (1.0 - cphi);
                double rz = wz * cphi + cz * sphi + kz * kdw * (1.0 - cphi);
                wx = rx; wy = ry; wz = rz;
            }

            ens.vx[p] = ugx + wx;
            ens.vy[p] = ugy + wy;
            ens.vz[p] = ugz + wz;

            ens.x[p] = wrap_torus(px + half * ens.vx[p]);
            ens.y[p] = wrap_torus(py + half * ens.vy[p]);
            ens.z[p] = wrap_torus(pz + half * ens.vz[p]);
        }
    });
}

Moments deposit_moments(const ParticleEnsemble& ens, const Grid& g) {
    const double inv_h3 = 1.0 / g.cell_volume();
    std::vector<double> rn(g.size(), 0.0), rkx(g.size(), 0.0), rky(g.size(), 0.0),
        rkz(g.size(), 0.0), rs2(g.size(), 0.0);

    // Deposition stays serial: scattered accumulation is cheap next to the
    // transforms and a fixed order keeps the result independent of threading.
    for (std::size_t p = 0; p < ens.size(); ++p) {
        CicStencil s = locate(g, ens.x[p], ens.y[p], ens.z[p]);
        double wgt = ens.w[p];
        double v0 = ens.vx[p], v1 = ens.vy[p], v2 = ens.vz[p];
        double speed2 = v0 * v0 + v1 * v1 + v2 * v2;
        for (int a = 0; a < 2; ++a) {
            double wx = (a ? s.f1[0] : 1.0 - s.f1[0]) * wgt;
            int ix = a ? s.i1[0] : s.i0[0];
            for (int b = 0; b < 2; ++b) {
                double wxy = wx * (b ? s.f1[1] : 1.0 - s.f1[1]);
                int iy = b ? s.i1[1] : s.i0[1];
                for (int c = 0; c < 2; ++c) {
                    double wnode = wxy * (c ? s.f1[2] : 1.0 - s.f1[2]);
                    std::size_t i = g.idx(ix, iy, c ? s.i1[2] : s.i0[2]);
                    rn[i] += wnode;
                    rkx[i] += wnode * v0;
                    rky[i] += wnode * v1;
                    rkz[i] += wnode * v2;
                    rs2[i] += wnode * speed2;
                }
            }
        }
    }

    for (std::size_t i = 0; i < rn.size(); ++i) {
        rn[i] *= inv_h3;
        rkx[i] *= inv_h3;
        rky[i] *= inv_h3;
        rkz[i] *= inv_h3;
        rs2[i] *= inv_h3;
    }

    Moments m(g);
    m.n = ScalarField::from_samples(g, rn);
    m.K = VectorField::from_components(ScalarField::from_samples(g, rkx),
                                       ScalarField::from_samples(g, rky),
                                       ScalarField::from_samples(g, rkz));
    m.sigma2 = ScalarField::from_samples(g, rs2);
    // Moments feed products with the dynamical fields, so they obey the same
    // open-band convention. The k = 0 sums are untouched by this.
    m.n.zero_nyquist();
    m.K.zero_nyquist();
    m.sigma2.zero_nyquist();
    return m;
}

ScalarField deposit_speed_moment(const ParticleEnsemble& ens, const Grid& g, double k) {
    if (!(k >= 0.0)) throw std::invalid_argument("deposit_speed_moment: k must be >= 0");

    const double inv_h3 = 1.0 / g.cell_volume();
    std::vector<double> rho(g.size(), 0.0);
    for (std::size_t p = 0; p < ens.size(); ++p) {
        CicStencil s = locate(g, ens.x[p], ens.y[p], ens.z[p]);
        double speed2 = ens.vx[p] * ens.vx[p] + ens.vy[p] * ens.vy[p] + ens.vz[p] * ens.vz[p];
        double wgt = ens.w[p] * std::pow(speed2, 0.5 * k);
        for (int a = 0; a < 2; ++a) {
            double wx = (a ? s.f1[0] : 1.0 - s.f1[0]) * wgt;
            int ix = a ? s.i1[0] : s.i0[0];
            for (int b = 0; b < 2; ++b) {
                double wxy = wx * (b ? s.f1[1] : 1.0 - s.f1[1]);
                int iy = b ? s.i1[1] : s.i0[1];
                for (int c = 0; c < 2; ++c)
                    rho[g.idx(ix, iy, c ? s.i1[2] : s.i0[2])] += wxy * (c ? s.f1[2] : 1.0 - s.f1[2]);
            }
        }
    }
    for (double& v : rho) v *= inv_h3;

    // No Nyquist trim here: this field feeds sign-sensitive L^p quadrature of
    // its samples, which must stay the nonnegative nodal densities, and it
    // never enters spectral products.
    return ScalarField::from_samples(g, rho);
}

double particle_energy(const ParticleEnsemble& ens) {
    KahanSum s;
    for (std::size_t p = 0; p < ens.size(); ++p) {
        double v2 = ens.vx[p] * ens.vx[p] + ens.vy[p] * ens.vy[p] + ens.vz[p] * ens.vz[p];
        s.add(ens.w[p] * v2);
    }
    return 0.5 * s.value();
}

double max_speed(const ParticleEnsemble& ens) {
    double m = 0.0;
    for (std::size_t p = 0; p < ens.size(); ++p) {
        double v2 = ens.vx[p] * ens.vx[p] + ens.vy[p] * ens.vy[p] + ens.vz[p] * ens.vz[p];
        m = std::max(m, v2);
    }
    return std::sqrt(m);
}

double support_radius_bound(double T, double C1, double C2) {
    if (T < 0.0 || C1 < 0.0 || C2 < 0.0)
        throw std::invalid_argument("support_radius_bound: arguments must be nonnegative");
    double eT = std::exp(T);
    double c2sq = C2 * C2;
    return std::sqrt(C1 * C1 * eT + (eT - 1.0) * c2sq * c2sq);
}

double estimate_lr_norm(const ParticleEnsemble& ens, double r, double x_bin, double v_bin) {
    if (!(r >= 1.0)) throw std::invalid_argument("estimate_lr_norm: r must be in [1, inf]");
    if (!(x_bin > 0.0) || !(v_bin > 0.0))
        throw std::invalid_argument("estimate_lr_norm: bin widths must be positive");

    if (r == 1.0) {
        // The histogram would only reshuffle the same weights; return the sum.
        KahanSum s;
        for (double wi : ens.w) s.add(wi);
        return s.value();
    }

    // Sorted keys give a deterministic reduction order for the norm below.
    std::map<std::array<std::int64_t, 6>, double> bins;
    for (std::size_t p = 0; p < ens.size(); ++p) {
        std::array<std::int64_t, 6> key = {
            static_cast<std::int64_t>(std::floor(ens.x[p] / x_bin)),
            static_cast<std::int64_t>(std::floor(ens.y[p] / x_bin)),
            static_cast<std::int64_t>(std::floor(ens.z[p] / x_bin)),
            static_cast<std::int64_t>(std::floor(ens.vx[p] / v_bin)),
            static_cast<std::int64_t>(std::floor(ens.vy[p] / v_bin)),
            static_cast<std::int64_t>(std::floor(ens.vz[p] / v_bin)),
        };
        bins[key] += ens.w[p];
    }

    const double vol = x_bin * x_bin * x_bin * v_bin * v_bin * v_bin;
    if (std::isinf(r)) {
        double m = 0.0;
        for (const auto& [key, mass] : bins) m = std::max(m, mass / vol);
        return m;
    }
    KahanSum s;
    for (const auto& [key, mass] : bins) s.add(std::pow(mass / vol, r) * vol);
    return std::pow(s.value(), 1.0 / r);
}

} // namespace hvmhd
