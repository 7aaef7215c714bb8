#pragma once
// Shared scalar types, error taxonomy and small math helpers used across the library.

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace grt {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Error categories map onto process exit codes in the CLI:
//   io/config -> 2, backend or config-pair mismatch -> 3, solver divergence -> 4.
enum class errc {
  io,
  config,
  backend_mismatch,
  mismatch,  // outputs paired with a different resolved config
  solver_diverged,
  series_diverged,
  trap_budget,
  domain,
};

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

// Wrap an angle to [0, 2*pi).
inline double wrap_2pi(double a) {
  double r = std::fmod(a, two_pi);
  if (r < 0) r += two_pi;
  // fmod of values just below a multiple of 2*pi can round up to 2*pi exactly.
  if (r >= two_pi) r -= two_pi;
  return r;
}

// Wrap an angle to (-pi, pi].
inline double wrap_pi(double a) {
  double r = wrap_2pi(a);
  return r > pi ? r - two_pi : r;
}

inline double sqr(double v) { return v * v; }

}  // namespace grt
