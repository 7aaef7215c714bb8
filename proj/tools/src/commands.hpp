#pragma once
// Subcommand implementations behind the `grt` executable. Each returns the
// process exit code for the cases it decides itself (check failures); errors
// from the library propagate as grt::error and are mapped in main.

#include <string>

#include "config.hpp"

namespace grt::cli {

struct Options {
  RunConfig config;
  std::string out_dir = ".";
  std::string input;   // reconstruct: explicit sinogram path (default: by prefix)
  int threads = 1;     // recorded in reports; the library itself is sequential
  bool force = false;  // reconstruct: accept a sinogram hashed by another config
};

int cmd_forward(const Options& o);
int cmd_reconstruct(const Options& o);
int cmd_factors(const Options& o);
int cmd_adjoint_check(const Options& o);

struct SelftestOptions {
  std::string out_dir = ".";
  std::string level = "full";  // quick | full (grid sizes of the checks)
  std::string inject_fault;    // "hilbert": corrupt the spectral multiplier
  int threads = 1;
};

int cmd_selftest(const SelftestOptions& o);

}  // namespace grt::cli
