#include "wgdl/verify.hpp"

#include <cmath>
#include <json.hpp>

#include "wgdl/diagnostics.hpp"
#include "wgdl/exponents.hpp"
#include "wgdl/field.hpp"
#include "wgdl/grid.hpp"
#include "wgdl/morawetz_algebra.hpp"
#include "wgdl/propagator.hpp"

namespace wgdl {

namespace {

using nlohmann::json;

json claim(const std::string& name, bool pass) {
  return json{{"name", name}, {"pass", pass}};
}

std::shared_ptr<const Grid> small_grid(int d, int n, int pe, int pt, double L) {
  GridSpec gs;
  gs.euclid_dims = d;
  gs.torus_dims = n;
  gs.points_euclid = pe;
  gs.points_torus = pt;
  gs.box_half_length = L;
  return make_grid(gs);
}

json suite_algebra(std::uint64_t seed) {
  json claims = json::array();

  const weight::FdReport fd = weight::fd_verify_all(200, seed);
  json c = claim("weight table vs 6th-order finite differences",
                 fd.max_rel_error <= 1e-6);
  c["max_rel_error"] = fd.max_rel_error;
  c["samples"] = fd.samples;
  c["worst_selector"] = weight::to_string(fd.worst.which);
  c["worst_r"] = fd.worst.r;
  c["worst_d"] = fd.worst.d;
  claims.push_back(c);

  const weight::SignReport sr = weight::sign_certificates(3, 100, 1000, seed);
  bool quad_ok = true, tri_ok = true, bi_ok = true, mixed_ok = true;
  bool quad_d3_fails = false, tri_d4_fails = false;
  double tri_witness = -1.0;
  for (const auto& ent : sr.entries) {
    if (ent.d == 3 && !ent.quadratic_pass) quad_d3_fails = true;
    if (ent.d >= 4 && !ent.quadratic_pass) quad_ok = false;
    if (ent.d == 4 && !ent.trilap_pass) {
      tri_d4_fails = true;
      tri_witness = ent.trilap_witness_r;
    }
    if (ent.d >= 5 && ent.d <= 50 && !ent.trilap_pass) tri_ok = false;
    if (ent.d >= 3 && !ent.bilap_pass) bi_ok = false;
    if (!ent.mixed_form_pass) mixed_ok = false;
  }
  c = claim("quadratic -d^2-8d+45 <= 0 for 4 <= d <= 100, fails at d = 3",
            quad_ok && quad_d3_fails);
  claims.push_back(c);
  c = claim("sixth derivative of the weight >= 0 for 5 <= d <= 50, "
            "counterexample at d = 4",
            tri_ok && tri_d4_fails);
  c["d4_witness_r"] = tri_witness;
  claims.push_back(c);
  claims.push_back(claim("fourth derivative of the weight <= 0 for d >= 3",
                         bi_ok));
  claims.push_back(claim("mixed directional form <= 0 on random samples",
                         mixed_ok));

  const weight::HessianReport hr = weight::hessian_bound_check(10000, 5, seed);
  c = claim("Hessian contraction bound on random matrices", hr.pass);
  c["samples"] = hr.samples;
  c["violations"] = hr.violations;
  c["max_violation"] = hr.max_violation;
  c["diag_identity_error"] = hr.diag_identity_error;
  c["r0_equality_error"] = hr.r0_equality_error;
  claims.push_back(c);

  return claims;
}

json suite_oracle(std::uint64_t seed) {
  json claims = json::array();
  struct Case {
    int d, pe, pt;
    const char* name;
  };
  const Case cases[] = {
      {1, 16, 4, "pair action FFT vs brute force, d = 1 (16 x 4)"},
      {2, 8, 4, "pair action FFT vs brute force, d = 2 (8 x 8 x 4)"},
  };
  for (const Case& cs : cases) {
    auto g = small_grid(cs.d, 1, cs.pe, cs.pt, 6.0);
    const ComplexField f = random_smooth_field(g, seed + cs.d, 3.0, 1.0);
    const double fft = morawetz_action(f);
    const double brute = morawetz_action_bruteforce(f);
    const double rel = std::abs(fft - brute) / std::max(std::abs(brute), 1e-300);
    json c = claim(cs.name, rel <= 1e-10);
    c["fft"] = fft;
    c["brute"] = brute;
    c["rel_error"] = rel;
    claims.push_back(c);
  }
  return claims;
}

json suite_convergence(std::uint64_t seed) {
  json claims = json::array();

  // mass conservation over a nonlinear run
  {
    auto g = small_grid(1, 1, 64, 8, 10.0);
    GaussianSpec gs;
    gs.amplitude = 1.0;
    gs.width = 1.0;
    const MakeFieldResult init = make_gaussian(g, gs);
    SolverConfig cfg;
    cfg.p = 2.0;
    cfg.dt = 1e-3;
    cfg.t_end = 0.2;
    cfg.record_every = 1000000;
    EvolveOptions opt;
    opt.diag.q_values = {};
    opt.diag.with_morawetz = false;
    const EvolveResult res = evolve(cfg, init.field, opt);
    const double m0 = res.records.front().mass;
    const double m1 = res.records.back().mass;
    const double drift = std::abs(m1 - m0) / m0;
    json c = claim("mass drift <= 1e-10 over 200 nonlinear steps",
                   res.status == EvolveStatus::ok && drift <= 1e-10);
    c["drift"] = drift;
    claims.push_back(c);
  }

  // second-order energy drift
  {
    auto g = small_grid(1, 1, 64, 8, 10.0);
    GaussianSpec gs;
    gs.amplitude = 1.0;
    gs.width = 1.0;
    const MakeFieldResult init = make_gaussian(g, gs);
    const auto drift_at = [&](double dt) {
      SolverConfig cfg;
      cfg.p = 2.0;
      cfg.dt = dt;
      cfg.t_end = 0.128;
      cfg.record_every = 1000000;
      EvolveOptions opt;
      opt.diag.with_morawetz = false;
      const EvolveResult res = evolve(cfg, init.field, opt);
      return std::abs(res.records.back().energy - res.records.front().energy);
    };
    const double e1 = drift_at(2e-3);
    const double e2 = drift_at(1e-3);
    const double ratio = e2 > 0.0 ? e1 / e2 : 0.0;
    json c = claim("energy drift halves twice when dt halves (ratio 4 +- 0.5)",
                   ratio >= 3.5 && ratio <= 4.5);
    c["ratio"] = ratio;
    c["drift_dt"] = e1;
    c["drift_dt_half"] = e2;
    claims.push_back(c);
  }

  // pair-action rate identity via central differences
  {
    auto g = small_grid(1, 1, 128, 8, 16.0);
    GaussianSpec gs;
    gs.amplitude = 0.8;
    gs.width = 1.5;
    gs.modulation = {2, 1};
    const MakeFieldResult init = make_gaussian(g, gs);
    SolverConfig cfg;
    cfg.p = 2.0;
    const double h = 1e-3;
    SolverState plus, minus;
    plus.field = init.field;
    minus.field = init.field;
    cfg.dt = h;
    strang_step(plus, cfg);
    cfg.dt = -h;
    strang_step(minus, cfg);
    const double dmdt =
        (morawetz_action(plus.field) - morawetz_action(minus.field)) /
        (2.0 * h);
    DiagnosticsConfig dcfg;
    dcfg.p = 2.0;
    const RhsTerms terms = morawetz_rhs_terms(init.field, dcfg);
    const double rel =
        std::abs(dmdt - terms.sum()) / std::max(std::abs(terms.sum()), 1e-300);
    json c = claim("pair-action rate identity (central difference vs term sum)",
                   rel <= 1e-3);
    c["central_difference"] = dmdt;
    c["term_sum"] = terms.sum();
    c["rel_error"] = rel;
    claims.push_back(c);
  }
  (void)seed;
  return claims;
}

json rational_str(const Rational& r) { return r.str(); }

json suite_exponents(std::uint64_t) {
  json claims = json::array();
  struct Tuple {
    int d, n;
    const char* p;
  };
  const Tuple tuples[] = {{5, 1, "2"}, {5, 2, "2"}, {5, 3, "9/5"}, {6, 1, "3/2"}};
  for (const Tuple& t : tuples) {
    const Rational p = Rational::parse(t.p);
    const std::string tag = "(d=" + std::to_string(t.d) + ", n=" +
                            std::to_string(t.n) + ", p=" + t.p + ")";
    const SolveOutcome o1 = solve_index1(t.d, t.n, p);
    const bool ok1 = o1.feasible && o1.index1.has_value() &&
                     verify_index1(*o1.index1, t.d, p);
    json c1 = claim("first exponent system " + tag, ok1);
    if (o1.index1) {
      c1["s"] = rational_str(o1.index1->s);
      c1["q"] = rational_str(o1.index1->q);
      c1["r"] = rational_str(o1.index1->r);
      c1["q_tilde"] = rational_str(o1.index1->q_tilde);
      c1["r_tilde"] = rational_str(o1.index1->r_tilde);
      c1["l"] = rational_str(o1.index1->l);
      c1["m"] = rational_str(o1.index1->m_exp);
    }
    claims.push_back(c1);

    const SolveOutcome o2 = solve_index2(t.d, t.n, p);
    const bool ok2 = o2.feasible && o2.index2.has_value() &&
                     verify_index2(*o2.index2, t.d, p);
    json c2 = claim("second exponent system " + tag, ok2);
    if (o2.index2) {
      c2["theta"] = rational_str(o2.index2->theta);
      c2["s"] = rational_str(o2.index2->s);
      c2["q_theta"] = rational_str(o2.index2->q_theta);
      c2["r_theta"] = rational_str(o2.index2->r_theta);
      c2["q_tilde"] = rational_str(o2.index2->q_tilde);
      c2["r_tilde"] = rational_str(o2.index2->r_tilde);
      c2["l"] = rational_str(o2.index2->l);
      c2["m"] = rational_str(o2.index2->m_exp);
    }
    claims.push_back(c2);
  }
  const CriticalityReport rep = criticality(5, 4, 2, Rational(2));
  json c = claim("four torus directions leave no admissible power window",
                 rep.cls == Criticality::empty_range);
  c["range_lo"] = rational_str(rep.range_lo);
  c["range_hi"] = rational_str(rep.range_hi);
  claims.push_back(c);
  return claims;
}

}  // namespace

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  json suites = json::object();
  if (name == "algebra" || name == "all") suites["algebra"] = suite_algebra(seed);
  if (name == "oracle" || name == "all") suites["oracle"] = suite_oracle(seed);
  if (name == "convergence" || name == "all")
    suites["convergence"] = suite_convergence(seed);
  if (name == "exponents" || name == "all")
    suites["exponents"] = suite_exponents(seed);
  if (suites.empty())
    fail(ErrorKind::validation,
         "unknown suite '" + name +
             "' (expected algebra, oracle, convergence, exponents, or all)");

  bool pass = true;
  for (const auto& [sname, claims] : suites.items())
    for (const auto& c : claims)
      if (!c.at("pass").get<bool>()) pass = false;

  json doc;
  doc["suite"] = name;
  doc["seed"] = seed;
  doc["pass"] = pass;
  doc["results"] = suites;

  SuiteResult out;
  out.pass = pass;
  out.report_json = doc.dump(2);
  return out;
}

}  // namespace wgdl
