#pragma once

#include <complex>
#include <vector>

namespace sarp {

// In-place radix-2 FFT, unnormalized: a_j <- sum_k a_k exp(sign * 2*pi*i*j*k/n).
// n must be a power of two. fft(a,+1) followed by fft(a,-1) multiplies by n.
void fft_pow2(std::vector<std::complex<double>>& a, int sign);

}  // namespace sarp
