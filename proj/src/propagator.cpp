#include "wgdl/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wgdl/threading.hpp"

namespace wgdl {

namespace {

// One sign convention covers both orders: i u_t = -sigma Lap^m u - ...
// reduces the linear flow to c_k(t) = e^{i sigma t symbol(k)} c_k(0) with
// sigma = +1 (m = 2, symbol |k|^4) and sigma = -1 (m = 1, symbol |k|^2).
double sigma_of(int m) { return m == 2 ? 1.0 : -1.0; }

// Effective nonlinear phase sign. For m = 1 the first-order flow
// (i d/dt + Lap)u = lambda |u|^p u rotates opposite to the m = 2 convention,
// so lambda = +1 stays defocusing for both orders.
double lambda_eff(const SolverConfig& cfg) {
  return cfg.m == 2 ? cfg.lambda : -cfg.lambda;
}

double sup_abs(const ComplexField& f) {
  const cplx* u = f.data();
  return par_max(f.size(), [&](std::size_t b, std::size_t e) {
    double m = 0.0;
    for (std::size_t i = b; i < e; ++i) m = std::max(m, std::abs(u[i]));
    return m;
  });
}

}  // namespace

bool validate_solver_config(const SolverConfig& cfg, const Grid& g) {
  if (cfg.m != 1 && cfg.m != 2)
    fail(ErrorKind::validation, "solver: order m must be 1 or 2");
  if (!(cfg.p > 0.0)) fail(ErrorKind::validation, "solver: p must be > 0");
  if (cfg.lambda != 1.0 && cfg.lambda != -1.0)
    fail(ErrorKind::validation, "solver: lambda must be +1 or -1");
  if (!(cfg.dt > 0.0)) fail(ErrorKind::validation, "solver: dt must be > 0");
  if (!(cfg.t_end > 0.0))
    fail(ErrorKind::validation, "solver: t_end must be > 0");
  if (cfg.record_every < 1)
    fail(ErrorKind::validation, "solver: record_every must be >= 1");
  if (!(cfg.blowup_threshold > 0.0))
    fail(ErrorKind::validation, "solver: blowup threshold must be > 0");
  if (cfg.lambda == -1.0 && cfg.nonlinear && g.d > 0 &&
      cfg.p >= 4.0 * cfg.m / g.d)
    return true;  // focusing at/above mass-critical: no global guarantee
  return false;
}

void linear_step(SolverState& state, const SolverConfig& cfg, double tau) {
  const Grid& g = state.field.grid();
  const double sigma = sigma_of(cfg.m);
  const double* sym = dispersion_symbol(g.table, 2 * cfg.m).data();
  SpectralField F = to_spectral(state.field);
  cplx* c = F.c.data();
  par_for(g.total, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      c[i] *= std::polar(1.0, sigma * tau * sym[i]);
  });
  state.field = to_physical(F);
}

void nonlinear_step(SolverState& state, const SolverConfig& cfg, double tau) {
  if (!cfg.nonlinear) return;
  const double le = lambda_eff(cfg);
  cplx* u = state.field.data();
  const std::size_t total = state.field.size();
  if (cfg.p == 2.0) {
    par_for(total, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        u[i] *= std::polar(1.0, le * tau * std::norm(u[i]));
    });
    return;
  }
  const double half_p = 0.5 * cfg.p;
  par_for(total, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      u[i] *= std::polar(1.0, le * tau * std::pow(std::norm(u[i]), half_p));
  });
}

bool strang_step(SolverState& state, const SolverConfig& cfg) {
  const Grid& g = state.field.grid();
  const double tau = cfg.dt;
  nonlinear_step(state, cfg, 0.5 * tau);

  SpectralField F = to_spectral(state.field);
  if (cfg.dealias == DealiasMode::two_thirds) dealias_spectrum(F);
  const double sigma = sigma_of(cfg.m);
  const double* sym = dispersion_symbol(g.table, 2 * cfg.m).data();
  cplx* c = F.c.data();
  par_for(g.total, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      c[i] *= std::polar(1.0, sigma * tau * sym[i]);
  });
  state.field = to_physical(F);

  nonlinear_step(state, cfg, 0.5 * tau);
  state.step += 1;
  state.t = static_cast<double>(state.step) * cfg.dt;
  return state.field.all_finite();
}

void dealias_spectrum(SpectralField& F) {
  const Grid& g = *F.grid;
  cplx* c = F.c.data();
  par_for(g.total, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      for (int a = 0; a < g.axes; ++a) {
        const std::size_t aa = static_cast<std::size_t>(a);
        const int idx =
            static_cast<int>((i / g.strides[aa]) %
                             static_cast<std::size_t>(g.dims[aa]));
        const int mode = g.mode_index(a, idx);
        if (3 * std::abs(mode) > g.dims[aa]) {
          c[i] = cplx(0.0, 0.0);
          break;
        }
      }
    }
  });
}

double compute_T_wrap(const ComplexField& initial, int m) {
  if (m != 1 && m != 2)
    fail(ErrorKind::validation, "T_wrap: dispersion order must be 1 or 2");
  const Grid& g = initial.grid();
  const double inf = std::numeric_limits<double>::infinity();
  if (g.d == 0) return inf;
  const SpectralField F = to_spectral(initial);
  const std::vector<double>& k2e = g.k2_euclid();
  const std::vector<double>& k2 = g.table.k2;
  // Euclidean transport speed per mode. For the fourth-order flow the group
  // velocity in x is 4|k|^2 k_x, so fiber wavenumbers accelerate box
  // crossings; for the second-order flow only k_x enters.
  std::vector<double> speed(g.total);
  for (std::size_t i = 0; i < g.total; ++i) {
    const double ke = std::sqrt(k2e[i]);
    speed[i] = m == 2 ? 4.0 * k2[i] * ke : 2.0 * ke;
  }
  std::vector<std::size_t> order(g.total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return speed[a] < speed[b];
  });
  double total = 0.0;
  for (const cplx& c : F.c) total += std::norm(c);
  if (total <= 0.0) return inf;
  const double target = 0.9999 * total;
  double cum = 0.0, v_max = 0.0;
  for (std::size_t i : order) {
    cum += std::norm(F.c[i]);
    v_max = speed[i];
    if (cum >= target) break;
  }
  if (v_max == 0.0) return inf;
  return g.spec.box_half_length / v_max;
}

EvolveResult evolve(const SolverConfig& cfg, const ComplexField& initial,
                    const EvolveOptions& options) {
  const Grid& g = initial.grid();
  if (g.d < 1)
    fail(ErrorKind::validation,
         "evolve: time integration requires at least one Euclidean axis");
  const bool flagged = validate_solver_config(cfg, g);
  if (options.initial_warned && !options.force)
    fail(ErrorKind::validation,
         "evolve: initial data flagged as under-resolved; pass force to run "
         "anyway");
  const double raw_steps = cfg.t_end / cfg.dt;
  const long long steps = static_cast<long long>(std::llround(raw_steps));
  if (steps < 1 ||
      std::abs(static_cast<double>(steps) * cfg.dt - cfg.t_end) >
          1e-9 * std::max(1.0, std::abs(cfg.t_end)))
    fail(ErrorKind::validation,
         "evolve: t_end must be a positive integer multiple of dt");

  SolverState st;
  st.field = initial;
  st.T_wrap = compute_T_wrap(initial, cfg.m);

  EvolveResult res;
  res.T_wrap = st.T_wrap;
  res.no_global_guarantee = flagged;

  const auto emit = [&]() {
    DiagnosticsRecord rec =
        compute_record(st.field, st.t, options.diag, st.t > st.T_wrap);
    res.records.push_back(rec);
    if (options.on_record) options.on_record(res.records.back(), st.field);
  };

  emit();  // step 0
  for (long long s = 1; s <= steps; ++s) {
    const bool finite = strang_step(st, cfg);
    if (!finite || sup_abs(st.field) > cfg.blowup_threshold) {
      res.status = EvolveStatus::blowup;
      res.abort_reason = finite
                             ? "field maximum exceeded the blowup threshold"
                             : "non-finite value during time step";
      break;
    }
    if (s == steps || s % cfg.record_every == 0) emit();
    if (s == steps) break;
  }
  res.final_field = st.field;
  res.t_reached = st.t;
  return res;
}

}  // namespace wgdl
