#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wgdl/exponents.hpp"
#include "wgdl/field.hpp"
#include "wgdl/grid.hpp"
#include "wgdl/propagator.hpp"

namespace wgdl {

// Initial-data block: one named constructor or a checkpoint path.
struct InitialConfig {
  std::string kind = "gaussian";  // gaussian | plane_wave | random | checkpoint
  double amplitude = 1.0;
  double width = 1.0;              // gaussian envelope width
  std::vector<double> center;      // gaussian center (Euclidean axes)
  std::vector<int> modes;          // integer mode index per axis (d+n)
  double decay = 3.0;              // random-field spectral decay
  std::string path;                // checkpoint source
};

struct OutputConfig {
  std::string format = "ndjson";   // ndjson | csv
  std::string records;             // filename inside --out (default records.<format>)
  long long checkpoint_every = 0;  // steps between checkpoints; 0 = final only
};

struct RunConfig {
  GridSpec grid;
  SolverConfig solver;
  DiagnosticsConfig diag;
  InitialConfig initial;
  OutputConfig output;
  std::uint64_t seed = 1;
  Rational p_exact{2};  // the solver p as written, for boundary-exact consumers
};

// Sectioned key = value text: sections [grid] [solver] [diagnostics] [output]
// [initial], '#' comments, list values separated by commas or spaces, numeric
// literals in decimal or rational (a/b) form. Errors carry the line number
// and the key involved (ErrorKind::config).
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

std::shared_ptr<const Grid> make_grid_from(const RunConfig& rc);

// Builds the configured initial field; the resolution warning is forwarded
// from the constructor when it has one.
MakeFieldResult build_initial(const RunConfig& rc,
                              const std::shared_ptr<const Grid>& grid);

}  // namespace wgdl
