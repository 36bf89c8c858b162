#pragma once

#include "hvmhd/field.hpp"

#include <array>
#include <vector>

namespace hvmhd {

// Forced linear incompressible MHD on the torus,
//   du/dt + (a.grad)u - (b.grad)B - Lap u = u x g + h - grad P,
//   dB/dt + (a.grad)B - (b.grad)u - Lap B = h1     - grad P_B,
// with time-independent solenoidal coefficient fields a, b, a rotation
// field g and forcings h, h1. Solved by expanding in the real
// divergence-free Fourier eigenbasis of the Laplacian, where the pressure
// gradients drop out and the stiff diagonal part is exact.
struct LinearMHDProblem {
    VectorField a, b, g, h, h1;
    VectorField init_u, init_B;
    double T = 1.0;

    explicit LinearMHDProblem(const Grid& gr)
        : a(gr), b(gr), g(gr), h(gr), h1(gr), init_u(gr), init_B(gr) {}

    // Checks T > 0, a shared grid, and solenoidality of a and b (residual
    // below 1e-12). The initial data need not be clean: projection onto the
    // divergence-free basis scrubs them.
    void validate() const;
};

// One real basis element: a constant field (k = 0) or a polarized cosine or
// sine mode. The eigenvalue of -Lap is |k|^2. Normalization is L^2-unit:
// constants carry (2pi)^{-3/2}, wave modes sqrt(2)(2pi)^{-3/2}.
struct BasisMode {
    enum class Phase { constant, cosine, sine };
    std::array<int, 3> k{0, 0, 0};
    std::array<double, 3> e{0.0, 0.0, 0.0};
    Phase phase = Phase::constant;
    int k2 = 0;
};

// The first n_modes elements of the deterministically ordered basis: the
// three constants first, then for each half-lattice representative k (first
// nonzero component positive, |k|_inf below the Nyquist band, sorted by |k|^2
// then lexicographically) the four modes (e1,cos), (e1,sin), (e2,cos),
// (e2,sin). The polarization pair (e1, e2) is built from the coordinate axis
// least aligned with k, so it is reproducible across runs and platforms.
class GalerkinSystem {
public:
    GalerkinSystem() = default;
    GalerkinSystem(const Grid& g, int n_modes);

    int size() const { return static_cast<int>(modes_.size()); }
    const BasisMode& mode(int j) const { return modes_[static_cast<std::size_t>(j)]; }
    const Grid& grid() const { return grid_; }

    // Total number of basis elements the grid can hold.
    static int capacity(const Grid& g);

    VectorField field(int j) const;
    std::vector<double> project(const VectorField& F) const;
    VectorField reconstruct(const std::vector<double>& coef) const;

private:
    Grid grid_;
    std::vector<BasisMode> modes_;
};

GalerkinSystem galerkin_basis(const Grid& g, int n_modes);

// Coefficient time series at uniform times 0, dt, ..., T, together with the
// full ODE right-hand side at each stored time (used by the a-priori bound,
// which integrates the time derivative).
struct LinearTrajectory {
    GalerkinSystem basis;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> u, B;
    std::vector<std::vector<double>> du, dB;
};

// Integrating-factor stepping: the -|k|^2 diagonal is applied exactly, the
// projected advection/stretch/rotation/forcing part explicitly at third
// order. dt is snapped so an integer number of steps lands on T. Throws on
// coefficient blowup (norm growth beyond 1e10).
LinearTrajectory integrate_linear_mhd(const LinearMHDProblem& p, int n_modes, double dt);

// |LHS - RHS| of the energy balance
//   ||(u,B)||^2 from 0 to T + 2 int ||(grad u, grad B)||^2
//     = 2 int <u,h> + <B,h1>,
// all time integrals by composite Simpson over the stored nodes (one order
// above the stepper, so the stepper's own error dominates the report).
double verify_energy_identity(const LinearTrajectory& tr, const LinearMHDProblem& p);

// Both sides of the pointwise-in-time a-priori bound
//   ||(grad u, grad B)||^2 from 0 to T + int ||(dt u, dt B)||^2
//     <= 2 sup{|a|^2,|b|^2,|g|^2,1} int ||(grad u, grad B, u, h, h1)||^2.
struct PtBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

PtBound verify_energy_pt_bound(const LinearTrajectory& tr, const LinearMHDProblem& p);

} // namespace hvmhd
