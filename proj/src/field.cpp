#include "hvmhd/field.hpp"

#include "hvmhd/util.hpp"

#include <cmath>
#include <stdexcept>

namespace hvmhd {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

ScalarField ScalarField::from_samples(const Grid& g, const std::vector<double>& values) {
    if (values.size() != g.size())
        throw std::invalid_argument("from_samples: value count does not match grid");
    ScalarField out(g);
    std::vector<cplx> buf(g.size());
    for (std::size_t i = 0; i < values.size(); ++i) buf[i] = cplx{values[i], 0.0};
    fft::forward(g.n, buf.data(), out.c_.data());
    out.enforce_hermitian();
    return out;
}

std::vector<double> ScalarField::samples() const {
    std::vector<cplx> buf(grid_.size());
    fft::backward(grid_.n, c_.data(), buf.data());
    std::vector<double> out(grid_.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
    return out;
}

void ScalarField::enforce_hermitian() {
    const int n = grid_.n;
    for (int jx = 0; jx < n; ++jx) {
        int px = grid_.conj_slot(jx);
        for (int jy = 0; jy < n; ++jy) {
            int py = grid_.conj_slot(jy);
            for (int jz = 0; jz < n; ++jz) {
                int pz = grid_.conj_slot(jz);
                std::size_t i = grid_.idx(jx, jy, jz);
                std::size_t p = grid_.idx(px, py, pz);
                if (i < p) {
                    cplx z = 0.5 * (c_[i] + std::conj(c_[p]));
                    c_[i] = z;
                    c_[p] = std::conj(z);
                } else if (i == p) {
                    c_[i] = cplx{c_[i].real(), 0.0};
                }
            }
        }
    }
}

double ScalarField::hermitian_residual() const {
    const int n = grid_.n;
    double worst = 0.0;
    for (int jx = 0; jx < n; ++jx)
        for (int jy = 0; jy < n; ++jy)
            for (int jz = 0; jz < n; ++jz) {
                std::size_t i = grid_.idx(jx, jy, jz);
                std::size_t p = grid_.idx(grid_.conj_slot(jx), grid_.conj_slot(jy),
                                          grid_.conj_slot(jz));
                worst = std::max(worst, std::abs(c_[i] - std::conj(c_[p])));
            }
    return worst;
}

double ScalarField::l2_norm() const {
    KahanSum s;
    for (const cplx& z : c_) s.add(std::norm(z));
    return std::pow(two_pi, 1.5) * std::sqrt(s.value());
}

double ScalarField::integral() const {
    return two_pi * two_pi * two_pi * c_[0].real();
}

double ScalarField::max_abs() const {
    double worst = 0.0;
    for (double v : samples()) worst = std::max(worst, std::abs(v));
    return worst;
}

double ScalarField::max_coeff() const {
    double worst = 0.0;
    for (const cplx& z : c_) worst = std::max(worst, std::abs(z));
    return worst;
}

void ScalarField::zero_nyquist() {
    const int n = grid_.n;
    const int ny = n / 2;
    for (int jx = 0; jx < n; ++jx)
        for (int jy = 0; jy < n; ++jy)
            for (int jz = 0; jz < n; ++jz)
                if (jx == ny || jy == ny || jz == ny)
                    c_[grid_.idx(jx, jy, jz)] = cplx{0.0, 0.0};
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "scalar +");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "scalar -");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (cplx& z : c_) z *= s;
    return *this;
}

void ScalarField::axpy(double a, const ScalarField& x) {
    require_same_grid(grid_, x.grid_, "scalar axpy");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += a * x.c_[i];
}

VectorField VectorField::from_components(ScalarField x, ScalarField y, ScalarField z,
                                         bool divfree) {
    require_same_grid(x.grid(), y.grid(), "vector components");
    require_same_grid(x.grid(), z.grid(), "vector components");
    VectorField v;
    v.comp_[0] = std::move(x);
    v.comp_[1] = std::move(y);
    v.comp_[2] = std::move(z);
    v.divergence_free_ = divfree;
    return v;
}

double VectorField::div_residual() const {
    const Grid& g = grid();
    const int n = g.n;
    double worst_div = 0.0;
    double worst_coeff = 0.0;
    for (int jx = 0; jx < n; ++jx) {
        double kx = g.wave(jx);
        for (int jy = 0; jy < n; ++jy) {
            double ky = g.wave(jy);
            for (int jz = 0; jz < n; ++jz) {
                double kz = g.wave(jz);
                std::size_t i = g.idx(jx, jy, jz);
                cplx cx = comp_[0].data()[i];
                cplx cy = comp_[1].data()[i];
                cplx cz = comp_[2].data()[i];
                worst_div = std::max(worst_div, std::abs(kx * cx + ky * cy + kz * cz));
                double mag = std::max(std::abs(cx), std::max(std::abs(cy), std::abs(cz)));
                worst_coeff = std::max(worst_coeff, mag);
            }
        }
    }
    if (worst_coeff == 0.0) return 0.0;
    return worst_div / worst_coeff;
}

double VectorField::l2_norm() const {
    KahanSum s;
    for (int i = 0; i < 3; ++i)
        for (const cplx& z : comp_[i].data()) s.add(std::norm(z));
    return std::pow(two_pi, 1.5) * std::sqrt(s.value());
}

double VectorField::max_abs() const {
    auto sx = comp_[0].samples();
    auto sy = comp_[1].samples();
    auto sz = comp_[2].samples();
    double worst = 0.0;
    for (std::size_t i = 0; i < sx.size(); ++i) {
        double m = sx[i] * sx[i] + sy[i] * sy[i] + sz[i] * sz[i];
        worst = std::max(worst, m);
    }
    return std::sqrt(worst);
}

void VectorField::enforce_hermitian() {
    for (auto& c : comp_) c.enforce_hermitian();
}

void VectorField::zero_nyquist() {
    for (auto& c : comp_) c.zero_nyquist();
}

VectorField& VectorField::operator+=(const VectorField& o) {
    for (int i = 0; i < 3; ++i) comp_[i] += o.comp_[i];
    divergence_free_ = divergence_free_ && o.divergence_free_;
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    for (int i = 0; i < 3; ++i) comp_[i] -= o.comp_[i];
    divergence_free_ = divergence_free_ && o.divergence_free_;
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    for (auto& c : comp_) c *= s;
    return *this;
}

void VectorField::axpy(double a, const VectorField& x) {
    for (int i = 0; i < 3; ++i) comp_[i].axpy(a, x[i]);
    divergence_free_ = divergence_free_ && x.divergence_free_;
}

double l2_inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "l2_inner");
    KahanSum s;
    const auto& ca = a.data();
    const auto& cb = b.data();
    for (std::size_t i = 0; i < ca.size(); ++i)
        s.add(ca[i].real() * cb[i].real() + ca[i].imag() * cb[i].imag());
    return two_pi * two_pi * two_pi * s.value();
}

double l2_inner(const VectorField& a, const VectorField& b) {
    double total = 0.0;
    for (int i = 0; i < 3; ++i) total += l2_inner(a[i], b[i]);
    return total;
}

} // namespace hvmhd
