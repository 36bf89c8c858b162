#pragma once

#include "hvmhd/field.hpp"
#include "hvmhd/mollifier.hpp"
#include "hvmhd/particles.hpp"

#include <stdexcept>

namespace hvmhd {

// Physical coefficients of the dimensional system. unity() recovers the
// nondimensional form in which every coefficient multiplies by exactly 1.0,
// through the same code path, so the two systems cannot drift apart.
struct PhysicalConstants {
    double q_h = 1.0;     // charge of the energetic species
    double m_h = 1.0;     // mass of the energetic species
    double kappa = 1.0;   // kinematic viscosity
    double eta = 1.0;     // resistivity
    double mu0 = 1.0;     // magnetic constant
    double rho_bar = 1.0; // bulk mass density

    static PhysicalConstants unity() { return {}; }

    void validate() const {
        if (!(q_h > 0.0 && m_h > 0.0 && kappa > 0.0 && eta > 0.0 && mu0 > 0.0 && rho_bar > 0.0))
            throw std::invalid_argument("PhysicalConstants: all coefficients must be positive");
    }

    double nu_u() const { return kappa / rho_bar; } // velocity diffusivity
    double nu_b() const { return eta / mu0; }       // magnetic diffusivity
    double charge_to_mass() const { return q_h / m_h; }
};

// The full simulation state: fluid velocity, magnetic field, marker ensemble,
// the smoothing level they evolve under, and the physical coefficients.
// U and B are kept exactly divergence-free by the stepper.
struct PlasmaState {
    double t = 0.0;
    VectorField U;
    VectorField B;
    ParticleEnsemble particles;
    MollifierSpec mollifier{0.0};
    PhysicalConstants constants;

    explicit PlasmaState(const Grid& g) : U(g, true), B(g, true) {}

    const Grid& grid() const { return U.grid(); }
};

} // namespace hvmhd
