#pragma once

#include <complex>
#include <cstddef>

namespace hvmhd::fft {

// Out-of-place complex 3D transforms on an m^3 cube, cached plans per m.
//
// forward produces Fourier coefficients: out_k = (1/m^3) sum_x in_x e^{-ik.x},
// so a field's samples are f(x) = sum_k out_k e^{+ik.x} and backward is that
// unnormalized synthesis sum. Plans are created with FFTW_ESTIMATE, which is
// deterministic (no timing-dependent algorithm choice), and FFTW threading is
// never initialized, so repeated runs produce bit-identical transforms.
void forward(int m, const std::complex<double>* in, std::complex<double>* out);
void backward(int m, const std::complex<double>* in, std::complex<double>* out);

} // namespace hvmhd::fft
