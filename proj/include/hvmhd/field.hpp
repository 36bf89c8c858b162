#pragma once

#include "hvmhd/fft.hpp"
#include "hvmhd/grid.hpp"

#include <array>
#include <complex>
#include <vector>

namespace hvmhd {

using cplx = std::complex<double>;

// Real scalar field on the torus, stored as its full cube of Fourier
// coefficients.
//
// Invariant: coeff(-k) == conj(coeff(k)) holds *bitwise*, not just to
// rounding. enforce_hermitian() establishes it after any transform from
// sample data, and every spectral operation in the library (real multipliers,
// i*k derivatives, Leray projection) preserves it exactly, because each one
// maps the +-k pair through arithmetic that commutes with conjugation in
// IEEE floating point. The bit-exact pairing is what lets checkpoints store
// only the independent half of the cube and restart runs bit-identically.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid_(g), c_(g.size(), cplx{0.0, 0.0}) {}

    static ScalarField from_samples(const Grid& g, const std::vector<double>& values);

    template <typename F>
    static ScalarField from_function(const Grid& g, F&& f) {
        std::vector<double> v(g.size());
        const double h = g.spacing();
        std::size_t i = 0;
        for (int jx = 0; jx < g.n; ++jx)
            for (int jy = 0; jy < g.n; ++jy)
                for (int jz = 0; jz < g.n; ++jz, ++i)
                    v[i] = f(jx * h, jy * h, jz * h);
        return from_samples(g, v);
    }

    const Grid& grid() const { return grid_; }
    bool empty() const { return c_.empty(); }

    const std::vector<cplx>& data() const { return c_; }
    std::vector<cplx>& data() { return c_; }
    cplx coeff(int jx, int jy, int jz) const { return c_[grid_.idx(jx, jy, jz)]; }
    cplx& coeff(int jx, int jy, int jz) { return c_[grid_.idx(jx, jy, jz)]; }

    // Synthesis on the grid's own sample points (real parts of the inverse
    // transform; the imaginary parts are exactly paired away by the Hermitian
    // invariant up to rounding noise).
    std::vector<double> samples() const;

    void enforce_hermitian();
    double hermitian_residual() const;

    double l2_norm() const;    // L^2(T^3) norm, (2pi)^{3/2} sqrt(sum |c_k|^2)
    double integral() const;   // (2pi)^3 Re c_0
    double max_abs() const;    // max over samples
    double max_coeff() const;  // max_k |c_k|

    void zero_nyquist();       // clear the three k_i = n/2 planes

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);
    void axpy(double a, const ScalarField& x); // this += a*x

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { a += b; return a; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { a -= b; return a; }
    friend ScalarField operator*(double s, ScalarField a) { a *= s; return a; }

private:
    Grid grid_;
    std::vector<cplx> c_;
};

// Real 3-vector field; components share one grid. divergence_free is a claim
// set by producers (Leray projection, curl, basis reconstruction) and checked
// against div_residual() in tests and step invariants.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const Grid& g, bool divfree = false)
        : comp_{ScalarField(g), ScalarField(g), ScalarField(g)}, divergence_free_(divfree) {}

    static VectorField from_components(ScalarField x, ScalarField y, ScalarField z,
                                       bool divfree = false);

    const Grid& grid() const { return comp_[0].grid(); }
    bool empty() const { return comp_[0].empty(); }

    ScalarField& operator[](int i) { return comp_[i]; }
    const ScalarField& operator[](int i) const { return comp_[i]; }

    bool divergence_free() const { return divergence_free_; }
    void set_divergence_free(bool v) { divergence_free_ = v; }

    // max_k |k . c(k)| / max_k |c(k)|; 0 for the zero field.
    double div_residual() const;

    double l2_norm() const;    // sqrt(sum of component norms squared)
    double max_abs() const;    // max over samples of the euclidean magnitude

    void enforce_hermitian();
    void zero_nyquist();

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);
    void axpy(double a, const VectorField& x);

    friend VectorField operator+(VectorField a, const VectorField& b) { a += b; return a; }
    friend VectorField operator-(VectorField a, const VectorField& b) { a -= b; return a; }
    friend VectorField operator*(double s, VectorField a) { a *= s; return a; }

private:
    std::array<ScalarField, 3> comp_;
    bool divergence_free_ = false;
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

// L^2(T^3) inner product of two real fields, evaluated by Parseval on the
// stored coefficients: (2pi)^3 sum_k Re(a_k conj(b_k)).
double l2_inner(const ScalarField& a, const ScalarField& b);
double l2_inner(const VectorField& a, const VectorField& b);

} // namespace hvmhd
