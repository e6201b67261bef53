// wgdl: batch front end for the waveguide dispersive-flow laboratory.
// Subcommands: simulate (run a configured evolution, stream records, write
// checkpoints, print a summary), verify (self-check suites), exponents
// (criticality report and exponent-system certificates).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wgdl/config.hpp"
#include "wgdl/diagnostics.hpp"
#include "wgdl/exponents.hpp"
#include "wgdl/propagator.hpp"
#include "wgdl/threading.hpp"
#include "wgdl/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wgdl;

namespace {

void apply_threads(int threads_flag) {
  if (threads_flag > 0) {
    set_thread_count(threads_flag);
    return;
  }
  if (const char* env = std::getenv("WGDL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) set_thread_count(n);
  }
}

std::string rstr(const Rational& r) { return r.str(); }

json criticality_json(const CriticalityReport& rep) {
  json j;
  j["d"] = rep.d;
  j["n"] = rep.n;
  j["order"] = rep.m;
  j["p"] = rstr(rep.p);
  j["mass_critical_p"] = rstr(rep.mass_critical_p);
  j["energy_critical_p"] = rstr(rep.energy_critical_p);
  j["range"] = {rstr(rep.range_lo), rstr(rep.range_hi)};
  j["class"] = to_string(rep.cls);
  return j;
}

json index1_json(const Index1Solution& s) {
  json j;
  j["s"] = rstr(s.s);
  j["delta"] = rstr(s.delta);
  j["q"] = rstr(s.q);
  j["r"] = rstr(s.r);
  j["q_tilde"] = rstr(s.q_tilde);
  j["r_tilde"] = rstr(s.r_tilde);
  j["l"] = rstr(s.l);
  j["m"] = rstr(s.m_exp);
  j["slack_qtilde"] = rstr(s.slack_qtilde);
  j["slack_l"] = rstr(s.slack_l);
  j["window_value"] = rstr(s.window_value);
  return j;
}

json index2_json(const Index2Solution& s) {
  json j;
  j["theta"] = rstr(s.theta);
  j["s"] = rstr(s.s);
  j["q_theta"] = rstr(s.q_theta);
  j["r_theta"] = rstr(s.r_theta);
  j["q_tilde"] = rstr(s.q_tilde);
  j["r_tilde"] = rstr(s.r_tilde);
  j["l"] = rstr(s.l);
  j["m"] = rstr(s.m_exp);
  return j;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::string& format_flag, long long seed_flag,
                 bool force) {
  RunConfig rc = load_run_config(config_path);
  if (!format_flag.empty()) {
    if (format_flag != "ndjson" && format_flag != "csv")
      fail(ErrorKind::config, "--format must be ndjson or csv");
    const bool defaulted =
        rc.output.records == "records.ndjson" || rc.output.records == "records.csv";
    rc.output.format = format_flag;
    if (defaulted) rc.output.records = "records." + format_flag;
  }
  if (seed_flag >= 0) rc.seed = static_cast<std::uint64_t>(seed_flag);

  fs::create_directories(out_dir);
  const fs::path records_path = fs::path(out_dir) / rc.output.records;
  std::ofstream records(records_path, std::ios::binary);
  if (!records)
    fail(ErrorKind::io, "cannot open records file: " + records_path.string());

  auto grid = make_grid_from(rc);
  const MakeFieldResult init = build_initial(rc, grid);

  EvolveOptions opt;
  opt.diag = rc.diag;
  opt.force = force;
  opt.initial_warned = init.resolution_warning;
  const bool csv = rc.output.format == "csv";
  long long emitted = 0;
  bool wrote_header = false;

  // dyadic snapshot steps for the scattering-residual ladder
  const long long total_steps =
      static_cast<long long>(std::llround(rc.solver.t_end / rc.solver.dt));
  std::vector<long long> snap_steps;
  for (int div : {8, 4, 2, 1}) {
    const long long s = total_steps / div;
    if (s > 0 && s * div == total_steps &&
        (snap_steps.empty() || snap_steps.back() != s))
      snap_steps.push_back(s);
  }
  std::vector<std::pair<double, ComplexField>> snaps;

  opt.on_record = [&](const DiagnosticsRecord& rec, const ComplexField& f) {
    if (csv) {
      if (!wrote_header) {
        records << csv_header(rec) << "\n";
        wrote_header = true;
      }
      records << to_csv_row(rec) << "\n";
    } else {
      records << to_ndjson(rec) << "\n";
    }
    ++emitted;
    if (rc.output.checkpoint_every > 0 &&
        emitted % rc.output.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "checkpoint_%06lld.bin", emitted);
      save_checkpoint((fs::path(out_dir) / name).string(), f);
    }
    const long long step =
        static_cast<long long>(std::llround(rec.t / rc.solver.dt));
    for (long long s : snap_steps)
      if (s == step) {
        snaps.emplace_back(rec.t, f);
        break;
      }
  };

  EvolveResult res = evolve(rc.solver, init.field, opt);
  records.close();
  save_checkpoint((fs::path(out_dir) / "final.bin").string(), res.final_field);

  json summary;
  summary["config"] = config_path;
  summary["status"] = res.status == EvolveStatus::ok ? "ok" : "blowup";
  if (!res.abort_reason.empty()) summary["abort_reason"] = res.abort_reason;
  summary["t_reached"] = res.t_reached;
  summary["T_wrap"] = res.T_wrap;
  summary["no_global_guarantee"] = res.no_global_guarantee;
  summary["records_file"] = records_path.string();
  summary["records"] = res.records.size();
  if (init.resolution_warning) {
    summary["initial_resolution_warning"] = true;
    summary["initial_tail_ratio"] = init.tail_ratio;
  }
  if (!res.records.empty()) {
    const DiagnosticsRecord& r0 = res.records.front();
    const DiagnosticsRecord& r1 = res.records.back();
    summary["mass_initial"] = r0.mass;
    summary["mass_final"] = r1.mass;
    summary["mass_drift"] =
        r0.mass > 0.0 ? std::abs(r1.mass - r0.mass) / r0.mass : 0.0;
    summary["energy_initial"] = r0.energy;
    summary["energy_final"] = r1.energy;
    summary["energy_drift"] =
        std::abs(r0.energy) > 0.0
            ? std::abs(r1.energy - r0.energy) / std::abs(r0.energy)
            : 0.0;
    int post = 0;
    for (const auto& rec : res.records) post += rec.post_wrap ? 1 : 0;
    summary["post_wrap_records"] = post;
  }
  if (res.status == EvolveStatus::ok && !rc.diag.r_values.empty()) {
    const long long steps =
        static_cast<long long>(std::llround(rc.solver.t_end / rc.solver.dt));
    if (steps % rc.solver.record_every == 0) {
      try {
        const MorawetzLhs lhs = morawetz_lhs_accumulate(res.records);
        summary["morawetz_time_integral"] = lhs.integral;
        summary["c_test"] = lhs.c_test;
      } catch (const Error&) {
        // non-uniform record series; skip the quotient
      }
    }
  }
  if (rc.diag.with_rhs_terms && res.status == EvolveStatus::ok) {
    try {
      const RhsTerms terms = morawetz_rhs_terms(res.final_field, rc.diag);
      json jt;
      jt["m1_plus_m2"] = terms.m1_plus_m2;
      jt["term_I"] = terms.term_I;
      jt["term_II"] = terms.term_II;
      jt["nonlinear_bracket"] = terms.nonlinear_bracket;
      jt["sign_definite_part"] = terms.sign_definite_part;
      jt["sum"] = terms.sum();
      summary["rhs_terms_final"] = jt;
    } catch (const Error& e) {
      summary["rhs_terms_final"] = std::string("skipped: ") + e.what();
    }
  }
  // scattering residual between consecutive dyadic snapshots
  if (res.status == EvolveStatus::ok && snaps.size() >= 2) {
    json rungs = json::array();
    for (std::size_t i = 1; i < snaps.size(); ++i) {
      json rung;
      rung["t1"] = snaps[i - 1].first;
      rung["t2"] = snaps[i].first;
      rung["residual"] =
          scattering_residual(snaps[i - 1].second, snaps[i - 1].first,
                              snaps[i].second, snaps[i].first, rc.solver.m);
      rungs.push_back(rung);
    }
    summary["residual_ladder"] = rungs;
  }
  std::cout << summary.dump(2) << "\n";
  return res.status == EvolveStatus::ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"waveguide dispersive-flow laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", format_flag, suite = "all";
  long long seed_flag = -1;
  int threads_flag = 0;
  bool force = false;

  CLI::App* sim = app.add_subcommand("simulate", "run a configured evolution");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--format", format_flag, "ndjson or csv");
  sim->add_option("--threads", threads_flag, "worker threads");
  sim->add_option("--seed", seed_flag, "override config seed");
  sim->add_flag("--force", force, "run despite resolution warnings");

  CLI::App* ver = app.add_subcommand("verify", "run self-check suites");
  ver->add_option("suite", suite,
                  "algebra | oracle | convergence | exponents | all");
  long long vseed = 1;
  ver->add_option("--seed", vseed, "suite seed");
  int vthreads = 0;
  ver->add_option("--threads", vthreads, "worker threads");

  CLI::App* exp = app.add_subcommand("exponents", "criticality + certificates");
  int ed = 0, en = 0;
  std::string eorder, ep;
  exp->add_option("d", ed, "Euclidean dimensions")->required();
  exp->add_option("n", en, "torus dimensions")->required();
  exp->add_option("order", eorder, "4nls or nls")->required();
  exp->add_option("p", ep, "nonlinearity power (rational)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      apply_threads(threads_flag);
      return cmd_simulate(config_path, out_dir, format_flag, seed_flag, force);
    }
    if (ver->parsed()) {
      apply_threads(vthreads);
      const SuiteResult r = run_suite(suite, static_cast<std::uint64_t>(vseed));
      std::cout << r.report_json << "\n";
      return r.pass ? 0 : 1;
    }
    // exponents
    int m = 0;
    if (eorder == "4nls")
      m = 2;
    else if (eorder == "nls")
      m = 1;
    else
      fail(ErrorKind::validation, "order must be 4nls or nls");
    const Rational p = Rational::parse(ep);
    const CriticalityReport rep = criticality(ed, en, m, p);
    json out;
    out["criticality"] = criticality_json(rep);
    if (m == 2 && rep.cls == Criticality::intermediate) {
      const SolveOutcome o1 = solve_index1(ed, en, p);
      const SolveOutcome o2 = solve_index2(ed, en, p);
      out["index1"] = o1.feasible && o1.index1 ? index1_json(*o1.index1)
                                               : json(o1.reason);
      out["index2"] = o2.feasible && o2.index2 ? index2_json(*o2.index2)
                                               : json(o2.reason);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
