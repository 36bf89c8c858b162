#pragma once

#include "hvmhd/mollifier.hpp"
#include "hvmhd/state.hpp"

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace hvmhd {

// Energy bookkeeping for one state. The three stores are the marker kinetic
// energy, (1/2)||U||^2 and (1/2)||B||^2; the conversion rates say where
// energy is flowing: r1 moves particle energy into the fluid, r2 moves fluid
// energy into the field. balance_residual is (e_total + cumulative
// dissipation) minus the initial total, so it should sit at zero for an
// isolated run up to time-discretization error.
struct EnergyReport {
    double e_fluid = 0.0;
    double e_mag = 0.0;
    double e_particles = 0.0;
    double e_total = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double dissipation_rate = 0.0;
    double cumulative_dissipation = 0.0;
    double balance_residual = 0.0;
};

// Instantaneous report; the running fields stay zero.
EnergyReport total_energy(const PlasmaState& state);

// Report against a running budget: the caller supplies the accumulated
// dissipation integral and the total energy at the start of the run.
EnergyReport total_energy(const PlasmaState& state, double cumulative_dissipation,
                          double e_total_initial);

// r1 = integral (U x B) . K, r2 = integral (curl B) . (U x B), both via
// dealiased products and Parseval. Moments are deposited from the state's
// own markers; an empty ensemble gives r1 = 0.
std::pair<double, double> conversion_rates(const PlasmaState& state);

// ||grad U||^2 + ||grad B||^2 alone, the integrand of the cumulative
// dissipation ledger; no deposits, so cheap enough for every step.
double dissipation_rate(const PlasmaState& state);

// One row of an energy-exchange history: stores, rates and gradient norms at
// a single time, cheap enough to record every step.
struct AuditFrame {
    double t = 0.0;
    double e_fluid = 0.0;
    double e_mag = 0.0;
    double e_particles = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double grad_u_sq = 0.0;
    double grad_b_sq = 0.0;
};

AuditFrame audit_frame(const PlasmaState& state);

// Worst deviation, over the interior frames of a history, between the
// centered finite-difference rate of each energy store and its exchange
// ledger:
//   d/dt e_particles = -r1
//   d/dt e_fluid     =  r1 - r2 - grad_u_sq
//   d/dt e_mag       =  r2 - grad_b_sq
struct ExchangeAudit {
    double particles = 0.0;
    double fluid = 0.0;
    double magnetic = 0.0;
};

// Requires at least three frames with strictly increasing times.
ExchangeAudit energy_exchange_audit(const std::vector<AuditFrame>& history);

// momentum = sum_p w v_p + integral U dx, mass = sum_p w. Both are conserved
// by the coupled dynamics (momentum exactly at epsilon = 0, to the smoothing
// mismatch otherwise; mass always, weights are never touched).
struct ConservedQuantities {
    std::array<double, 3> momentum{0.0, 0.0, 0.0};
    double mass = 0.0;
};

ConservedQuantities conserved_quantities(const PlasmaState& state);

// Explicit constant in the interpolation bound for speed moments,
//   || integral |v|^k f dv ||_{L^{5/(3+k)}} <= C(k) ||f||_inf^{(2-k)/5} E^{(3+k)/5},
// E the kinetic energy (1/2) integral |v|^2 f. Splitting the v-integral at
// radius N gives rho_k(x) <= (4pi/(3+k)) N^{3+k} ||f||_inf + N^{k-2} sigma(x)
// with sigma the second-moment density; minimizing over N and taking the
// L^{5/(3+k)} norm in x (whose exponent turns sigma^{(3+k)/5} into
// (integral sigma)^{(3+k)/5} = (2E)^{(3+k)/5}) yields
//   C(k) = (5/(3+k)) (4pi/(2-k))^{(2-k)/5} 2^{(3+k)/5},
// continued to C(2) = 2, where the bound is an exact identity.
double moment_bound_constant(double k);

// Verdict on one instance of the bound above. ratio = lhs/rhs, and holds
// allows the relative tolerance passed to moment_bound_report.
struct BoundReport {
    double k = 0.0;
    double lhs_norm = 0.0;
    double rhs_bound = 0.0;
    double ratio = 0.0;
    bool holds = false;
};

// speed_moment is the gridded density of |v|^k f (deposit_speed_moment, or a
// closed form); its L^{5/(3+k)} norm is taken on the grid samples. k must
// lie in [0, 2] and f_inf must be positive.
BoundReport moment_bound_report(const ScalarField& speed_moment, double f_inf,
                                double e_particles, double k, double tolerance = 1e-9);

// Sup of the analytic initial kinetic density: plateau height times the
// modulation peak. Mollification only averages, so this also bounds the
// smoothed density the markers are drawn from, and transport preserves it.
double density_sup(const BallDensity& f0);

// Scalar test function g(t,x,v) = time(t) space(x) vel(v) for the kinetic
// weak equation, carried with its analytic derivatives.
struct KineticTest {
    std::string label;
    std::function<double(double)> time;
    std::function<double(double)> time_dot;
    std::function<double(const std::array<double, 3>&)> space;
    std::function<std::array<double, 3>(const std::array<double, 3>&)> space_grad;
    std::function<double(const std::array<double, 3>&)> vel;
    std::function<std::array<double, 3>(const std::array<double, 3>&)> vel_grad;
};

// Vector test function V(t,x) = time(t) shape(x) for the momentum and
// induction weak equations. shape must be divergence-free.
struct FieldTest {
    std::string label;
    std::function<double(double)> time;
    std::function<double(double)> time_dot;
    VectorField shape;
};

struct WeakTestSuite {
    std::vector<KineticTest> kinetic;
    std::vector<FieldTest> field;
};

// A small default family: constants, one low Fourier mode per direction
// paired with a compactly supported radial bump in v, and single-mode
// divergence-free shapes, each with constant and linear time factors.
WeakTestSuite standard_weak_suite(const Grid& g);

// One tested weak equation: lhs collects the time-boundary terms, rhs the
// time-integrated interior terms, residual = |lhs - rhs|.
struct WeakResidualRow {
    std::string test;
    std::string equation; // "kinetic", "momentum" or "induction"
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

// Evaluates the three weak equations over a recorded history (states at
// increasing times, the first one being the initial data) against every test
// function in the suite. Integrals in x use spectral quadrature, integrals
// against f use the marker sum, integrals in t the trapezoid rule on the
// history's own lattice. Throws if the history is shorter than two frames,
// times do not increase, or a field-test shape is not divergence-free.
std::vector<WeakResidualRow> weak_residual(const std::vector<PlasmaState>& history,
                                           const WeakTestSuite& suite);

} // namespace hvmhd
