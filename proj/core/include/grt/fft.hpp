#pragma once
// Thin wrapper over a cached complex FFT, in the conventions used throughout:
// forward is the unnormalized DFT, inverse carries the 1/n factor.

#include <vector>

#include "grt/common.hpp"

namespace grt {

// X_k = sum_j x_j e^{-i 2 pi j k / n}, in place.
void fft_forward(cplx* data, int n);

// x_j = (1/n) sum_k X_k e^{+i 2 pi j k / n}, in place.
void fft_inverse(cplx* data, int n);

// Signed frequency of DFT bin idx for length n: 0,1,...,n/2-1,-n/2,...,-1.
inline int signed_freq(int idx, int n) { return idx < (n + 1) / 2 ? idx : idx - n; }

}  // namespace grt
