#pragma once

// FFTW-backed real transforms with a per-size plan cache. Planning is
// serialized; execution uses the new-array interface and is reentrant.

#include <complex>
#include <cstddef>

namespace lakesim::detail {

/// out (n x (n/2+1) complex) = unnormalized r2c transform of in (n x n).
void fft_r2c(std::size_t n, const double* in, std::complex<double>* out);
/// out (n x n) = unnormalized c2r transform; `in` is clobbered.
void fft_c2r(std::size_t n, std::complex<double>* in, double* out);

}  // namespace lakesim::detail
