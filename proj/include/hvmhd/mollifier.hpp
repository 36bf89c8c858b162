#pragma once

#include "hvmhd/field.hpp"
#include "hvmhd/particles.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

namespace hvmhd {

// The smoothing kernel is the standard normalized bump supported on the ball
// of radius 1/2,
//   theta0(x) = c exp(-1 / (1 - 4|x|^2))      for |x| < 1/2,
// with c fixed so the integral over R^3 is one. These give its radial profile
// and the cached scalar constants derived from it by quadrature.
double theta0(double rho);
double theta0_normalization();   // the constant c
double theta0_peak();            // theta0(0) = c / e, the sup of the kernel
double theta0_second_moment();   // integral of |x|^2 theta0(x) dx, strictly < 1

// Scaled-kernel smoothing, applied as a Fourier multiplier. epsilon = 0 is a
// sentinel meaning "no smoothing": the same code paths then run the original
// sharp system. The multiplier profile is computed once per grid by adaptive
// radial quadrature and cached; after that the spec is immutable and safe to
// share across threads.
class MollifierSpec {
public:
    explicit MollifierSpec(double epsilon);

    double epsilon() const { return epsilon_; }
    bool is_identity() const { return epsilon_ == 0.0; }

    // Transform-side kernel value at radial frequency kappa = epsilon |k|,
    // computed directly by quadrature (no cache). Real because the kernel is
    // even; clamped to [-1, 1] so smoothing can never amplify a mode.
    double multiplier_at(double kappa) const;

    // Lookup table indexed by integer |k|^2 covering the grid's full band.
    // Built on first use per grid size, then reused by reference.
    const std::vector<double>& table_for(const Grid& g) const;

private:
    // The cache sits behind a shared pointer so specs stay cheap to copy
    // (states carry one around) while all copies share one table per grid.
    struct Cache {
        std::mutex mu;
        std::map<int, std::unique_ptr<const std::vector<double>>> tables;
    };
    double epsilon_;
    std::shared_ptr<Cache> cache_;
};

ScalarField mollify_x(const ScalarField& f, const MollifierSpec& spec);
VectorField mollify_x(const VectorField& v, const MollifierSpec& spec);

// L^p norm of the m-th derivative of the scaled kernel, p conjugate to r:
//   C(epsilon, r, m) = epsilon^(-m - 3(1 - 1/p)) * ||D^m theta0||_{L^p}.
// These are the constants that control moments of a density tested against
// smoothed fields. m is 0, 1 or 2 (value, gradient, Hessian Frobenius norm).
double mollifier_norm_constant(const MollifierSpec& spec, double r, int m);

// Analytic initial kinetic density: a velocity ball of radius v0 at constant
// height M, optionally modulated in x1 by 1 + mod_amp cos(mod_k x1).
struct BallDensity {
    double M = 1.0;
    double v0 = 1.0;
    double mod_amp = 0.0;
    int mod_k = 1;
};

// Draw a marker ensemble from the smoothed, velocity-cut initial density:
// sample the sharp density restricted to |v| <= 1/epsilon, then jitter each
// marker by independent scaled-kernel draws in x and in v (Monte Carlo
// convolution). Weights are all equal and sum exactly to the analytic mass of
// the restricted density; every velocity ends up inside 1/epsilon + epsilon/2.
// Zero mass yields an empty ensemble.
ParticleEnsemble prepare_initial_f(const BallDensity& f0, const MollifierSpec& spec,
                                   std::size_t count, std::mt19937_64& rng);

} // namespace hvmhd
