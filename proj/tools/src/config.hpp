#pragma once
// Run configuration for the command-line tool: JSON schema with defaults,
// validation that reports the offending key path, canonical echo of the
// resolved configuration, and the hash stamped onto every output.

#include <string>
#include <vector>

#include "grt/inversion.hpp"
#include "grt/io.hpp"
#include "grt/phantoms.hpp"

namespace grt::cli {

using io::json;

struct RunConfig {
  MetricModel metric = MetricModel::euclidean(1.0);

  double attenuation_constant = 0.0;
  std::vector<PhantomTerm> attenuation_terms;

  // Scalar phantom, or (exclusive) the matched pair (a p + dp) built from a
  // potential: either the polynomial rim-flat potential or rendered terms.
  std::vector<PhantomTerm> phantom_terms;
  bool gauge_mode = false;
  double gauge_polynomial_scale = 0.0;
  std::vector<PhantomTerm> potential_terms;

  int nx = 64;
  int nboundary = 128;
  int ntheta = 0;  // 0: matches nboundary

  I0Backend backend = I0Backend::LeastSquares;
  bool real_valued = true;
  double cgls_tol = 1e-6;
  int cgls_max_iterations = 60;
  double neumann_tol = 1e-10;
  int neumann_max_terms = 50;

  TraceOptions trace{0.01, 1e-10, 400000};
  uint64_t seed = 12345;
  std::string prefix = "run";

  json resolved() const;     // canonical echo, all defaults materialized
  std::string hash() const;  // hash of the canonical echo

  SpatialGrid spatial_grid() const { return SpatialGrid(nx, nx, metric.radius()); }
  BoundaryGrid boundary_grid() const { return BoundaryGrid(nboundary, metric.radius()); }
  int fiber_count() const { return ntheta > 0 ? ntheta : nboundary; }
  bool has_attenuation() const {
    return attenuation_constant != 0.0 || !attenuation_terms.empty();
  }

  CScalarField attenuation_field(const SpatialGrid& g) const;
  CScalarField phantom_field(const SpatialGrid& g) const;  // zero in gauge mode
  CScalarField potential_field(const SpatialGrid& g) const;
  PairField source_pair(const SpatialGrid& g) const;  // what forward projects
  ReconstructionConfig reconstruction_config() const;
};

// Throws errc::config with the offending key path on schema violations.
RunConfig parse_config(const json& j);
RunConfig load_config_file(const std::string& path);

I0Backend backend_from_string(const std::string& s);

}  // namespace grt::cli
