#include "hvmhd/spectral_ops.hpp"

#include "hvmhd/util.hpp"

#include <cmath>
#include <stdexcept>

namespace hvmhd {

ScalarField derivative(const ScalarField& f, int axis) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("derivative: axis must be 0..2");
    const Grid& g = f.grid();
    const int n = g.n;
    const int ny = g.nyquist();
    ScalarField out(g);
    for (int jx = 0; jx < n; ++jx) {
        for (int jy = 0; jy < n; ++jy) {
            for (int jz = 0; jz < n; ++jz) {
                int j[3] = {jx, jy, jz};
                if (j[axis] == ny) continue; // Nyquist plane stays zero
                double k = g.wave(j[axis]);
                cplx z = f.coeff(jx, jy, jz);
                out.coeff(jx, jy, jz) = cplx{-k * z.imag(), k * z.real()}; // i*k*z
            }
        }
    }
    return out;
}

VectorField gradient(const ScalarField& f) {
    return VectorField::from_components(derivative(f, 0), derivative(f, 1), derivative(f, 2));
}

ScalarField divergence(const VectorField& v) {
    ScalarField out = derivative(v[0], 0);
    out += derivative(v[1], 1);
    out += derivative(v[2], 2);
    return out;
}

VectorField curl(const VectorField& v) {
    ScalarField cx = derivative(v[2], 1) - derivative(v[1], 2);
    ScalarField cy = derivative(v[0], 2) - derivative(v[2], 0);
    ScalarField cz = derivative(v[1], 0) - derivative(v[0], 1);
    // curl output is divergence-free identically on the Nyquist-zeroed band
    return VectorField::from_components(std::move(cx), std::move(cy), std::move(cz), true);
}

ScalarField laplacian(const ScalarField& f) {
    const Grid& g = f.grid();
    const int n = g.n;
    const int ny = g.nyquist();
    ScalarField out(g);
    for (int jx = 0; jx < n; ++jx) {
        double kx = g.wave(jx);
        for (int jy = 0; jy < n; ++jy) {
            double ky = g.wave(jy);
            for (int jz = 0; jz < n; ++jz) {
                if (jx == ny || jy == ny || jz == ny) continue; // match div(grad)
                double kz = g.wave(jz);
                double k2 = kx * kx + ky * ky + kz * kz;
                out.coeff(jx, jy, jz) = -k2 * f.coeff(jx, jy, jz);
            }
        }
    }
    return out;
}

VectorField laplacian(const VectorField& v) {
    return VectorField::from_components(laplacian(v[0]), laplacian(v[1]), laplacian(v[2]),
                                        v.divergence_free());
}

VectorField leray_project(VectorField v) {
    const Grid& g = v.grid();
    const int n = g.n;
    // The projector differentiates, so it shares the derivative convention:
    // the sign of the Nyquist frequency is unrepresentable, and mixing those
    // planes through k k^T would break the conjugate pairing. Clear them.
    v.zero_nyquist();
    for (int jx = 0; jx < n; ++jx) {
        double kx = g.wave(jx);
        for (int jy = 0; jy < n; ++jy) {
            double ky = g.wave(jy);
            for (int jz = 0; jz < n; ++jz) {
                double kz = g.wave(jz);
                double k2 = kx * kx + ky * ky + kz * kz;
                if (k2 == 0.0) continue; // mean mode passes through
                std::size_t i = g.idx(jx, jy, jz);
                cplx d = (kx * v[0].data()[i] + ky * v[1].data()[i] + kz * v[2].data()[i]) / k2;
                v[0].data()[i] -= kx * d;
                v[1].data()[i] -= ky * d;
                v[2].data()[i] -= kz * d;
            }
        }
    }
    v.set_divergence_free(true);
    return v;
}

ScalarField pressure_of(const VectorField& unprojected_tendency) {
    // P = inverse Laplacian of div(tendency), so that
    // tendency == leray_project(tendency) + gradient(P).
    ScalarField rhs = divergence(unprojected_tendency);
    const Grid& g = rhs.grid();
    const int n = g.n;
    ScalarField p(g);
    for (int jx = 0; jx < n; ++jx) {
        double kx = g.wave(jx);
        for (int jy = 0; jy < n; ++jy) {
            double ky = g.wave(jy);
            for (int jz = 0; jz < n; ++jz) {
                double kz = g.wave(jz);
                double k2 = kx * kx + ky * ky + kz * kz;
                if (k2 == 0.0) continue;
                p.coeff(jx, jy, jz) = rhs.coeff(jx, jy, jz) / -k2;
            }
        }
    }
    return p;
}

namespace detail {

int padded_size(const Grid& g) {
    int extra = static_cast<int>(std::ceil(g.dealias_fraction * g.n / 2.0));
    int m = g.n + extra;
    if (m % 2 != 0) ++m;
    return m;
}

namespace {

// Per-axis slot expansion for the pad: an n-grid slot lands on one m-grid
// slot, except the Nyquist slot which splits half/half onto +-n/2.
struct AxisMap {
    int dst[2];
    double w[2];
    int count;
};

AxisMap pad_axis_map(const Grid& g, int j, int m) {
    AxisMap a{};
    int k = g.wave(j);
    if (j == g.nyquist()) {
        a.count = 2;
        a.dst[0] = g.nyquist();
        a.w[0] = 0.5;
        a.dst[1] = m - g.nyquist();
        a.w[1] = 0.5;
    } else {
        a.count = 1;
        a.dst[0] = k >= 0 ? k : m + k;
        a.w[0] = 1.0;
    }
    return a;
}

} // namespace

void pad_coeffs(const Grid& g, const std::vector<cplx>& in, int m, std::vector<cplx>& out) {
    const int n = g.n;
    out.assign(static_cast<std::size_t>(m) * m * m, cplx{0.0, 0.0});
    for (int jx = 0; jx < n; ++jx) {
        AxisMap ax = pad_axis_map(g, jx, m);
        for (int jy = 0; jy < n; ++jy) {
            AxisMap ay = pad_axis_map(g, jy, m);
            for (int jz = 0; jz < n; ++jz) {
                AxisMap az = pad_axis_map(g, jz, m);
                cplx v = in[g.idx(jx, jy, jz)];
                if (v == cplx{0.0, 0.0}) continue;
                for (int a = 0; a < ax.count; ++a)
                    for (int b = 0; b < ay.count; ++b)
                        for (int c = 0; c < az.count; ++c) {
                            std::size_t i =
                                (static_cast<std::size_t>(ax.dst[a]) * m + ay.dst[b]) * m +
                                az.dst[c];
                            out[i] += ax.w[a] * ay.w[b] * az.w[c] * v;
                        }
            }
        }
    }
}

void truncate_coeffs(const Grid& g, const std::vector<cplx>& in, int m, std::vector<cplx>& out) {
    const int n = g.n;
    out.assign(g.size(), cplx{0.0, 0.0});
    for (int jx = 0; jx < n; ++jx) {
        AxisMap ax = pad_axis_map(g, jx, m);
        for (int jy = 0; jy < n; ++jy) {
            AxisMap ay = pad_axis_map(g, jy, m);
            for (int jz = 0; jz < n; ++jz) {
                AxisMap az = pad_axis_map(g, jz, m);
                cplx sum{0.0, 0.0};
                for (int a = 0; a < ax.count; ++a)
                    for (int b = 0; b < ay.count; ++b)
                        for (int c = 0; c < az.count; ++c) {
                            std::size_t i =
                                (static_cast<std::size_t>(ax.dst[a]) * m + ay.dst[b]) * m +
                                az.dst[c];
                            sum += in[i]; // fold: weight 1 on both Nyquist images
                        }
                out[g.idx(jx, jy, jz)] = sum;
            }
        }
    }
}

std::vector<double> padded_samples(const ScalarField& f, int m) {
    std::vector<cplx> padded;
    pad_coeffs(f.grid(), f.data(), m, padded);
    std::vector<cplx> buf(padded.size());
    fft::backward(m, padded.data(), buf.data());
    std::vector<double> out(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
    return out;
}

ScalarField field_from_padded_samples(const Grid& g, int m, const std::vector<double>& s) {
    std::vector<cplx> buf(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) buf[i] = cplx{s[i], 0.0};
    std::vector<cplx> coeffs(s.size());
    fft::forward(m, buf.data(), coeffs.data());
    ScalarField out(g);
    truncate_coeffs(g, coeffs, m, out.data());
    out.enforce_hermitian();
    // Products are truncated to the open band |k| < n/2, same as derivatives.
    // Keeping every produced field Nyquist-free makes the product exact on its
    // whole support and lets the Appendix-style identities close without a
    // stray half-represented plane.
    out.zero_nyquist();
    return out;
}

} // namespace detail

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "multiply");
    const int m = detail::padded_size(a.grid());
    auto sa = detail::padded_samples(a, m);
    auto sb = detail::padded_samples(b, m);
    for (std::size_t i = 0; i < sa.size(); ++i) sa[i] *= sb[i];
    return detail::field_from_padded_samples(a.grid(), m, sa);
}

VectorField multiply(const ScalarField& f, const VectorField& v) {
    require_same_grid(f.grid(), v.grid(), "multiply");
    const int m = detail::padded_size(f.grid());
    auto sf = detail::padded_samples(f, m);
    std::array<ScalarField, 3> comp;
    for (int i = 0; i < 3; ++i) {
        auto sv = detail::padded_samples(v[i], m);
        for (std::size_t j = 0; j < sv.size(); ++j) sv[j] *= sf[j];
        comp[i] = detail::field_from_padded_samples(f.grid(), m, sv);
    }
    return VectorField::from_components(std::move(comp[0]), std::move(comp[1]),
                                        std::move(comp[2]));
}

ScalarField dot(const VectorField& u, const VectorField& v) {
    require_same_grid(u.grid(), v.grid(), "dot");
    const int m = detail::padded_size(u.grid());
    std::vector<double> acc;
    for (int i = 0; i < 3; ++i) {
        auto su = detail::padded_samples(u[i], m);
        auto sv = detail::padded_samples(v[i], m);
        if (i == 0) {
            acc.resize(su.size());
            for (std::size_t j = 0; j < su.size(); ++j) acc[j] = su[j] * sv[j];
        } else {
            for (std::size_t j = 0; j < su.size(); ++j) acc[j] += su[j] * sv[j];
        }
    }
    return detail::field_from_padded_samples(u.grid(), m, acc);
}

VectorField cross(const VectorField& u, const VectorField& v) {
    require_same_grid(u.grid(), v.grid(), "cross");
    const int m = detail::padded_size(u.grid());
    std::array<std::vector<double>, 3> su, sv;
    for (int i = 0; i < 3; ++i) {
        su[i] = detail::padded_samples(u[i], m);
        sv[i] = detail::padded_samples(v[i], m);
    }
    std::array<ScalarField, 3> comp;
    for (int i = 0; i < 3; ++i) {
        int a = (i + 1) % 3, b = (i + 2) % 3;
        std::vector<double> w(su[0].size());
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] = su[a][j] * sv[b][j] - su[b][j] * sv[a][j];
        comp[i] = detail::field_from_padded_samples(u.grid(), m, w);
    }
    return VectorField::from_components(std::move(comp[0]), std::move(comp[1]),
                                        std::move(comp[2]));
}

std::array<ScalarField, 9> tensor_product(const VectorField& u, const VectorField& v) {
    require_same_grid(u.grid(), v.grid(), "tensor_product");
    const int m = detail::padded_size(u.grid());
    std::array<std::vector<double>, 3> su, sv;
    for (int i = 0; i < 3; ++i) {
        su[i] = detail::padded_samples(u[i], m);
        sv[i] = detail::padded_samples(v[i], m);
    }
    std::array<ScalarField, 9> out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            std::vector<double> w(su[0].size());
            for (std::size_t p = 0; p < w.size(); ++p) w[p] = su[i][p] * sv[j][p];
            out[3 * i + j] = detail::field_from_padded_samples(u.grid(), m, w);
        }
    return out;
}

ScalarField advect(const VectorField& a, const ScalarField& f) {
    require_same_grid(a.grid(), f.grid(), "advect");
    const int m = detail::padded_size(a.grid());
    std::vector<double> acc;
    for (int j = 0; j < 3; ++j) {
        auto sa = detail::padded_samples(a[j], m);
        auto sd = detail::padded_samples(derivative(f, j), m);
        if (j == 0) {
            acc.resize(sa.size());
            for (std::size_t p = 0; p < sa.size(); ++p) acc[p] = sa[p] * sd[p];
        } else {
            for (std::size_t p = 0; p < sa.size(); ++p) acc[p] += sa[p] * sd[p];
        }
    }
    return detail::field_from_padded_samples(f.grid(), m, acc);
}

VectorField advect(const VectorField& a, const VectorField& u) {
    require_same_grid(a.grid(), u.grid(), "advect");
    const int m = detail::padded_size(a.grid());
    std::array<std::vector<double>, 3> sa;
    for (int j = 0; j < 3; ++j) sa[j] = detail::padded_samples(a[j], m);
    std::array<ScalarField, 3> comp;
    for (int i = 0; i < 3; ++i) {
        std::vector<double> acc(sa[0].size(), 0.0);
        for (int j = 0; j < 3; ++j) {
            auto sd = detail::padded_samples(derivative(u[i], j), m);
            for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += sa[j][p] * sd[p];
        }
        comp[i] = detail::field_from_padded_samples(u.grid(), m, acc);
    }
    return VectorField::from_components(std::move(comp[0]), std::move(comp[1]),
                                        std::move(comp[2]));
}

namespace {

double residual_scalar(const ScalarField& l, const ScalarField& r) {
    return (l - r).max_abs();
}

double residual_vector(const VectorField& l, const VectorField& r) {
    return (l - r).max_abs();
}

const ScalarField& need_f(const IdentityInputs& in, const char* id) {
    if (!in.f) throw std::invalid_argument(std::string(id) + ": scalar input f required");
    return *in.f;
}
const ScalarField& need_g(const IdentityInputs& in, const char* id) {
    if (!in.g) throw std::invalid_argument(std::string(id) + ": scalar input g required");
    return *in.g;
}
const VectorField& need_u(const IdentityInputs& in, const char* id) {
    if (!in.u) throw std::invalid_argument(std::string(id) + ": vector input u required");
    return *in.u;
}
const VectorField& need_v(const IdentityInputs& in, const char* id) {
    if (!in.v) throw std::invalid_argument(std::string(id) + ": vector input v required");
    return *in.v;
}

} // namespace

double check_identity(Identity id, const IdentityInputs& in) {
    switch (id) {
    case Identity::A1: {
        const ScalarField& f = need_f(in, "A1");
        const ScalarField& g = need_g(in, "A1");
        VectorField lhs = gradient(multiply(f, g));
        VectorField rhs = multiply(f, gradient(g)) + multiply(g, gradient(f));
        return residual_vector(lhs, rhs);
    }
    case Identity::A2: {
        const VectorField& u = need_u(in, "A2");
        const VectorField& v = need_v(in, "A2");
        VectorField lhs = gradient(dot(u, v));
        VectorField rhs = cross(u, curl(v)) + cross(v, curl(u)) + advect(u, v) + advect(v, u);
        return residual_vector(lhs, rhs);
    }
    case Identity::A3: {
        const ScalarField& f = need_f(in, "A3");
        const VectorField& v = need_v(in, "A3");
        ScalarField lhs = divergence(multiply(f, v));
        ScalarField rhs = multiply(f, divergence(v)) + dot(v, gradient(f));
        return residual_scalar(lhs, rhs);
    }
    case Identity::A4: {
        const VectorField& u = need_u(in, "A4");
        const VectorField& v = need_v(in, "A4");
        ScalarField lhs = divergence(cross(u, v));
        ScalarField rhs = dot(v, curl(u)) - dot(u, curl(v));
        return residual_scalar(lhs, rhs);
    }
    case Identity::A5: {
        const ScalarField& f = need_f(in, "A5");
        const VectorField& v = need_v(in, "A5");
        VectorField lhs = curl(multiply(f, v));
        VectorField rhs = cross(gradient(f), v) + multiply(f, curl(v));
        return residual_vector(lhs, rhs);
    }
    case Identity::A6: {
        const VectorField& u = need_u(in, "A6");
        const VectorField& v = need_v(in, "A6");
        VectorField lhs = curl(cross(u, v));
        VectorField rhs = multiply(divergence(v), u) - multiply(divergence(u), v) +
                          advect(v, u) - advect(u, v);
        return residual_vector(lhs, rhs);
    }
    case Identity::A7: {
        const VectorField& u = need_u(in, "A7");
        VectorField lhs = cross(curl(u), u);
        VectorField rhs = advect(u, u) - 0.5 * gradient(dot(u, u));
        return residual_vector(lhs, rhs);
    }
    }
    throw std::invalid_argument("check_identity: unknown identity");
}

} // namespace hvmhd
