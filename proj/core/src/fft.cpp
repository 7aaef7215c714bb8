#include "grt/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace grt {

namespace {
// One plan cache per thread; Eigen::FFT keeps per-length plans internally.
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}
}  // namespace

void fft_forward(cplx* data, int n) {
  thread_local std::vector<cplx> out;
  out.resize(n);
  engine().fwd(out.data(), data, n);
  std::copy(out.begin(), out.end(), data);
}

void fft_inverse(cplx* data, int n) {
  thread_local std::vector<cplx> out;
  out.resize(n);
  engine().inv(out.data(), data, n);
  std::copy(out.begin(), out.end(), data);
}

}  // namespace grt
