#pragma once

#include "hvmhd/field.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace hvmhd {

// Marker representation of the kinetic density. Structure-of-arrays: the push
// loop is the innermost hot loop of the whole scheme and wants contiguous
// coordinates. Weights carry phase-space mass and are never modified by
// transport; the total weight is the discrete L1 norm of f.
struct ParticleEnsemble {
    std::vector<double> x, y, z;
    std::vector<double> vx, vy, vz;
    std::vector<double> w;

    std::size_t size() const { return w.size(); }
    bool empty() const { return w.empty(); }

    void reserve(std::size_t n) {
        x.reserve(n); y.reserve(n); z.reserve(n);
        vx.reserve(n); vy.reserve(n); vz.reserve(n);
        w.reserve(n);
    }
    void add(const std::array<double, 3>& pos, const std::array<double, 3>& vel, double weight) {
        x.push_back(pos[0]); y.push_back(pos[1]); z.push_back(pos[2]);
        vx.push_back(vel[0]); vy.push_back(vel[1]); vz.push_back(vel[2]);
        w.push_back(weight);
    }
};

// Velocity moments of the marker ensemble, deposited on the grid and held
// spectrally like every other field. K is a genuine first moment, not
// divergence-free.
struct Moments {
    ScalarField n;
    VectorField K;
    ScalarField sigma2; // density of |v|^2 f; its integral is twice the kinetic energy

    explicit Moments(const Grid& g) : n(g), K(g), sigma2(g) {}
};

// Advance markers through one step of the characteristic system
//   dX/dt = V,   dV/dt = chi (V - U(X)) x B(X).
// Boris-style: half drift, gather U and B at the midpoint position, rotate
// V - U about the local magnetic axis by the exact angle chi |B| dt, half
// drift. The rotation preserves |V - U| to rounding, which is what keeps the
// frozen-field energy drift flat over long horizons.
// Throws if the sampled fields contain NaNs.
void push_particles(ParticleEnsemble& ens, const VectorField& U, const VectorField& B,
                    double dt, double charge_to_mass = 1.0);

// Cloud-in-cell deposition of w, w v, w |v|^2, scaled to densities and
// transformed. Discrete sums are preserved: the k = 0 coefficients give back
// the marker sums of w, w v, w |v|^2 exactly up to transform rounding.
Moments deposit_moments(const ParticleEnsemble& ens, const Grid& g);

// Cloud-in-cell deposition of w |v|^k for real k >= 0, same kernel and
// scaling as deposit_moments; k = 0 and k = 2 match its n and sigma2
// channels below the Nyquist planes. Unlike the dynamical moments the full
// spectrum is kept, so the samples are exactly the nonnegative nodal
// densities; that is what the L^p moment bounds integrate.
ScalarField deposit_speed_moment(const ParticleEnsemble& ens, const Grid& g, double k);

// (1/2) sum w |v|^2
double particle_energy(const ParticleEnsemble& ens);

double max_speed(const ParticleEnsemble& ens);

// Growth bound for the velocity-support radius under bounded fields:
//   G(T, C1, C2) = sqrt(C1^2 e^T + (e^T - 1) C2^4),
// monotone in every argument. C1 is the initial support radius, C2 a sup
// bound on the advecting and magnetic fields over [0, T].
double support_radius_bound(double T, double C1, double C2);

// Histogram estimate of the phase-space L^r norm on boxes of side x_bin in
// position and v_bin in velocity. r = 1 bypasses the histogram and returns
// the exact total weight; r = infinity returns the max bin density. This is
// an estimator: it carries binning bias like any particle reconstruction.
double estimate_lr_norm(const ParticleEnsemble& ens, double r, double x_bin, double v_bin);

// Periodic trilinear interpolation of a sampled field; the same kernel CIC
// deposition uses, exposed so the adjointness of gather and scatter can be
// checked directly.
double trilinear_sample(const Grid& g, const std::vector<double>& samples, double px, double py,
                        double pz);

} // namespace hvmhd
