#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wgdl/diagnostics.hpp"
#include "wgdl/field.hpp"

namespace wgdl {

enum class DealiasMode { off, two_thirds };

// Strang-splitting integrator for (i d/dt + Lap^m)u + lambda |u|^p u = 0,
// lambda = +1 defocusing / -1 focusing for both dispersion orders.
struct SolverConfig {
  int m = 2;                       // Laplacian power: 2 = biharmonic flow
  double p = 2.0;                  // nonlinearity exponent, > 0
  double lambda = 1.0;             // +1 or -1
  double dt = 1e-3;
  double t_end = 1.0;
  int record_every = 1;
  DealiasMode dealias = DealiasMode::off;
  bool nonlinear = true;           // false = free flow (p-term disabled)
  double blowup_threshold = 1e8;   // abort when sup|u| exceeds this
};

// Throws ErrorKind::validation on out-of-range fields. Returns true when the
// focusing range carries no global-existence guarantee (lambda = -1 with p at
// or above the mass-critical exponent 4m/d).
bool validate_solver_config(const SolverConfig& cfg, const Grid& g);

struct SolverState {
  ComplexField field;
  double t = 0.0;
  long long step = 0;
  double T_wrap = std::numeric_limits<double>::infinity();
};

// Exact substeps. linear_step multiplies each coefficient by
// e^{i sigma tau symbol(k)} with sigma = +1, symbol = |k|^4 for m = 2 and
// sigma = -1, symbol = |k|^2 for m = 1; nonlinear_step rotates the phase
// pointwise, leaving |u| untouched. Neither advances the clock.
void linear_step(SolverState& state, const SolverConfig& cfg, double tau);
void nonlinear_step(SolverState& state, const SolverConfig& cfg, double tau);

// Half nonlinear, full linear, half nonlinear; advances t by cfg.dt.
// Returns false when a non-finite value appears.
bool strang_step(SolverState& state, const SolverConfig& cfg);

// Two-thirds rule: zeroes coefficients whose signed mode index exceeds 2/3 of
// the Nyquist index on any axis. Idempotent.
void dealias_spectrum(SpectralField& F);

// Box-wrap horizon: T = L / v_max with v_max the largest Euclidean group
// speed (4|k|^2 |k_x| for m = 2, where |k| includes fiber wavenumbers;
// 2|k_x| for m = 1) over the modes holding 99.99% of the spectral mass.
// Infinity when d = 0 or when that mass sits on non-transporting modes.
double compute_T_wrap(const ComplexField& initial, int m);

enum class EvolveStatus { ok, blowup };

struct EvolveOptions {
  DiagnosticsConfig diag;
  // Called for every emitted record with a snapshot of the current field.
  std::function<void(const DiagnosticsRecord&, const ComplexField&)> on_record;
  bool force = false;           // run despite flagged initial data
  bool initial_warned = false;  // constructor reported under-resolution
};

struct EvolveResult {
  std::vector<DiagnosticsRecord> records;
  ComplexField final_field;
  EvolveStatus status = EvolveStatus::ok;
  double t_reached = 0.0;
  double T_wrap = std::numeric_limits<double>::infinity();
  std::string abort_reason;
  bool no_global_guarantee = false;
};

// Runs to t_end (which must be an integer multiple of dt), recording at step
// 0, every record_every steps, and the final step. Records with t > T_wrap
// are tagged post-wrap. On blowup (sup|u| above threshold, or NaN) the run
// stops with the last finite-state field preserved and no further records.
EvolveResult evolve(const SolverConfig& cfg, const ComplexField& initial,
                    const EvolveOptions& options);

}  // namespace wgdl
