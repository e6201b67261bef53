#pragma once

#include <cstdint>
#include <string>

namespace wgdl {

// Self-check suites behind the `verify` subcommand:
//   algebra      closed-form weight table vs finite differences, sign
//                certificates, Hessian contraction bound
//   oracle       FFT pair-action vs the brute-force double sum
//   convergence  mass conservation, second-order energy drift, and the
//                pair-action rate identity via central differences
//   exponents    lattice certificates for the reference (d, n, p) tuples
//   all          everything above
struct SuiteResult {
  bool pass = false;
  std::string report_json;  // one machine-readable JSON document
};

SuiteResult run_suite(const std::string& name, std::uint64_t seed);

}  // namespace wgdl
