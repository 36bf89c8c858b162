#pragma once

#include "hvmhd/util.hpp"

#include <cstddef>
#include <stdexcept>

namespace hvmhd {

// Uniform periodic grid on [0, 2*pi)^3 with n samples per axis.
//
// Spectral layout is the usual FFT one: slot j along an axis carries the
// integer wavenumber k = j for j <= n/2 and k = j - n otherwise, i.e. the
// wavenumber set is {-n/2+1, ..., n/2}. Slot n/2 (the Nyquist slot) stands
// for both frequencies +-n/2 of a real signal and gets special treatment in
// differentiation and in the dealiasing pad/fold.
struct Grid {
    int n = 0;
    double dealias_fraction = 1.0; // 1.0 = full 3/2-rule padding on products

    static Grid make(int n, double dealias_fraction = 1.0) {
        if (n < 4 || n % 2 != 0)
            throw std::invalid_argument("grid: n must be even and >= 4");
        if (!(dealias_fraction > 0.0) || dealias_fraction > 1.0)
            throw std::invalid_argument("grid: dealias_fraction must be in (0,1]");
        Grid g;
        g.n = n;
        g.dealias_fraction = dealias_fraction;
        return g;
    }

    bool operator==(const Grid&) const = default;

    std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
    double spacing() const { return two_pi / n; }
    double cell_volume() const { double h = spacing(); return h * h * h; }

    int wave(int j) const { return j <= n / 2 ? j : j - n; }
    int nyquist() const { return n / 2; }

    std::size_t idx(int jx, int jy, int jz) const {
        return (static_cast<std::size_t>(jx) * n + jy) * n + jz;
    }

    // Slot of the mirrored mode -k.
    int conj_slot(int j) const { return j == 0 ? 0 : n - j; }
};

} // namespace hvmhd
