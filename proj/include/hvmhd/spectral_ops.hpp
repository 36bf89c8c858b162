#pragma once

#include "hvmhd/field.hpp"

#include <array>
#include <optional>

namespace hvmhd {

// Differentiation. Multiplier i*k per axis; the k = n/2 Nyquist planes are
// zeroed afterwards, because the single Nyquist slot of a real signal cannot
// carry the sign information an odd derivative needs. laplacian composes the
// same convention so that laplacian == div(grad) exactly.
ScalarField derivative(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
VectorField curl(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& v);

// L^2-orthogonal projection onto divergence-free fields: mode-wise
// c -> c - k (k.c)/|k|^2, identity on the mean mode. Replaces the pressure
// gradients: the projected momentum tendency is the unprojected one minus a
// gradient, and that gradient is the (unique up to constant) pressure.
VectorField leray_project(VectorField v);

// Optional diagnostic: the scalar whose gradient the projection removed,
// recovered by inverting the Laplacian of the divergence.
ScalarField pressure_of(const VectorField& unprojected_tendency);

// ---------------------------------------------------------------------------
// Dealiased products.
//
// Each binary product is evaluated pointwise on a padded grid of
// m = n + ceil(dealias_fraction * n / 2) points (rounded up to even; the
// fraction 1.0 gives the exact 3/2 rule), then truncated back. Padding splits
// the Nyquist slot value half-and-half onto the +-n/2 slots of the fine grid
// and truncation folds them back by summation, so pad-then-truncate is the
// bitwise identity and the truncated product equals the exact convolution
// restricted to the retained band whenever the inputs are band-limited below
// the 3/2 threshold. Triple products are formed as two successive binary
// products, each alias-free.
//
// Product results are returned Nyquist-free, matching the derivative
// convention: every field the library produces lives in the open band
// |k| < n/2, where products are exact convolutions on their full support.
// ---------------------------------------------------------------------------
ScalarField multiply(const ScalarField& a, const ScalarField& b);
VectorField multiply(const ScalarField& f, const VectorField& v);
ScalarField dot(const VectorField& u, const VectorField& v);
VectorField cross(const VectorField& u, const VectorField& v);
// Outer product u (x) v, row-major: result[3*i + j] = u_i v_j.
std::array<ScalarField, 9> tensor_product(const VectorField& u, const VectorField& v);
// Advective derivative (a . grad) u.
VectorField advect(const VectorField& a, const VectorField& u);
ScalarField advect(const VectorField& a, const ScalarField& f);

namespace detail {
int padded_size(const Grid& g);
// Spectral pad n -> m and fold m -> n with the exact Nyquist split/sum.
void pad_coeffs(const Grid& g, const std::vector<cplx>& in, int m, std::vector<cplx>& out);
void truncate_coeffs(const Grid& g, const std::vector<cplx>& in, int m, std::vector<cplx>& out);
// Samples of a field on its padded grid (inverse transform of the pad).
std::vector<double> padded_samples(const ScalarField& f, int m);
// Forward transform of padded samples, folded back to the field's grid.
ScalarField field_from_padded_samples(const Grid& g, int m, const std::vector<double>& s);
} // namespace detail

// ---------------------------------------------------------------------------
// Product-rule identities used as cross-checks of the whole operator stack.
// Each returns the max-norm of (left side - right side), both sides assembled
// from the dealiased primitives above.
//   A1  grad(f g)        = f grad g + g grad f                    needs f, g
//   A2  grad(u . v)      = u x curl v + v x curl u + (u.g)v + (v.g)u   u, v
//   A3  div(f v)         = f div v + v . grad f                   needs f, v
//   A4  div(u x v)       = v . curl u - u . curl v                needs u, v
//   A5  curl(f v)        = grad f x v + f curl v                  needs f, v
//   A6  curl(u x v)      = u div v - v div u + (v.g)u - (u.g)v    needs u, v
//   A7  (curl u) x u     = (u.g)u - (1/2) grad |u|^2              needs u
// ---------------------------------------------------------------------------
enum class Identity { A1, A2, A3, A4, A5, A6, A7 };

struct IdentityInputs {
    std::optional<ScalarField> f;
    std::optional<ScalarField> g;
    std::optional<VectorField> u;
    std::optional<VectorField> v;
};

double check_identity(Identity id, const IdentityInputs& in);

} // namespace hvmhd
