#include "wgdl/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace wgdl {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void bad(int line, const std::string& msg) {
  fail(ErrorKind::config, "config line " + std::to_string(line) + ": " + msg);
}

double number_of(int line, const std::string& key, const std::string& tok) {
  try {
    return Rational::parse(tok).to_double();
  } catch (const Error&) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end && *end == '\0' && end != tok.c_str()) return v;
    bad(line, "key '" + key + "': cannot parse number '" + tok + "'");
  }
}

long long int_of(int line, const std::string& key, const std::string& tok) {
  try {
    const Rational r = Rational::parse(tok);
    if (r.den != 1) bad(line, "key '" + key + "': expected an integer");
    return r.num;
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::config) throw;
    bad(line, "key '" + key + "': cannot parse integer '" + tok + "'");
  }
}

bool bool_of(int line, const std::string& key, const std::string& tok) {
  if (tok == "true" || tok == "on" || tok == "1") return true;
  if (tok == "false" || tok == "off" || tok == "0") return false;
  bad(line, "key '" + key + "': expected true/false/on/off");
}

std::vector<std::string> tokens_of(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::pair<std::string, double>> keyed_list_of(
    int line, const std::string& key, const std::string& value) {
  std::vector<std::pair<std::string, double>> out;
  for (const std::string& tok : tokens_of(value)) {
    if (tok.find('"') != std::string::npos)
      bad(line, "key '" + key + "': token contains a quote");
    out.emplace_back(tok, number_of(line, key, tok));
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig rc;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool p_exact_ok = true;

  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') bad(line, "unterminated section header");
      section = s.substr(1, s.size() - 2);
      if (section != "grid" && section != "solver" && section != "diagnostics" &&
          section != "output" && section != "initial")
        bad(line, "unknown section '" + section + "'");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) bad(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) bad(line, "empty key");
    if (value.empty()) bad(line, "key '" + key + "': empty value");
    if (section.empty()) bad(line, "key '" + key + "' before any section");
    seen.insert(section + "." + key);

    if (section == "grid") {
      if (key == "euclid_dims")
        rc.grid.euclid_dims = static_cast<int>(int_of(line, key, value));
      else if (key == "torus_dims")
        rc.grid.torus_dims = static_cast<int>(int_of(line, key, value));
      else if (key == "points_euclid")
        rc.grid.points_euclid = static_cast<int>(int_of(line, key, value));
      else if (key == "points_torus")
        rc.grid.points_torus = static_cast<int>(int_of(line, key, value));
      else if (key == "box_half_length")
        rc.grid.box_half_length = number_of(line, key, value);
      else if (key == "torus_period")
        rc.grid.torus_period = number_of(line, key, value);
      else
        bad(line, "unknown key '" + key + "' in [grid]");
    } else if (section == "solver") {
      if (key == "m")
        rc.solver.m = static_cast<int>(int_of(line, key, value));
      else if (key == "p") {
        rc.solver.p = number_of(line, key, value);
        try {
          rc.p_exact = Rational::parse(value);
        } catch (const Error&) {
          p_exact_ok = false;
        }
      } else if (key == "lambda")
        rc.solver.lambda = number_of(line, key, value);
      else if (key == "dt")
        rc.solver.dt = number_of(line, key, value);
      else if (key == "t_end")
        rc.solver.t_end = number_of(line, key, value);
      else if (key == "record_every")
        rc.solver.record_every = static_cast<int>(int_of(line, key, value));
      else if (key == "dealias") {
        if (value == "off")
          rc.solver.dealias = DealiasMode::off;
        else if (value == "two_thirds")
          rc.solver.dealias = DealiasMode::two_thirds;
        else
          bad(line, "key 'dealias': expected off or two_thirds");
      } else if (key == "nonlinear")
        rc.solver.nonlinear = bool_of(line, key, value);
      else if (key == "blowup_threshold")
        rc.solver.blowup_threshold = number_of(line, key, value);
      else
        bad(line, "unknown key '" + key + "' in [solver]");
    } else if (section == "diagnostics") {
      if (key == "q_list")
        rc.diag.q_values = keyed_list_of(line, key, value);
      else if (key == "r_list")
        rc.diag.r_values = keyed_list_of(line, key, value);
      else if (key == "morawetz")
        rc.diag.with_morawetz = bool_of(line, key, value);
      else if (key == "gn")
        rc.diag.with_gn = bool_of(line, key, value);
      else if (key == "gn_r")
        rc.diag.gn_r = number_of(line, key, value);
      else if (key == "rhs_terms")
        rc.diag.with_rhs_terms = bool_of(line, key, value);
      else
        bad(line, "unknown key '" + key + "' in [diagnostics]");
    } else if (section == "output") {
      if (key == "format") {
        if (value != "ndjson" && value != "csv")
          bad(line, "key 'format': expected ndjson or csv");
        rc.output.format = value;
      } else if (key == "records")
        rc.output.records = value;
      else if (key == "checkpoint_every")
        rc.output.checkpoint_every = int_of(line, key, value);
      else
        bad(line, "unknown key '" + key + "' in [output]");
    } else {  // initial
      if (key == "kind") {
        if (value != "gaussian" && value != "plane_wave" && value != "random" &&
            value != "checkpoint")
          bad(line,
              "key 'kind': expected gaussian, plane_wave, random, or "
              "checkpoint");
        rc.initial.kind = value;
      } else if (key == "amplitude")
        rc.initial.amplitude = number_of(line, key, value);
      else if (key == "width")
        rc.initial.width = number_of(line, key, value);
      else if (key == "center") {
        rc.initial.center.clear();
        for (const std::string& tok : tokens_of(value))
          rc.initial.center.push_back(number_of(line, key, tok));
      } else if (key == "modes") {
        rc.initial.modes.clear();
        for (const std::string& tok : tokens_of(value))
          rc.initial.modes.push_back(
              static_cast<int>(int_of(line, key, tok)));
      } else if (key == "decay")
        rc.initial.decay = number_of(line, key, value);
      else if (key == "path")
        rc.initial.path = value;
      else if (key == "seed")
        rc.seed = static_cast<std::uint64_t>(int_of(line, key, value));
      else
        bad(line, "unknown key '" + key + "' in [initial]");
    }
  }

  const auto require = [&](const char* k) {
    if (!seen.count(k))
      fail(ErrorKind::config, std::string("missing required key: ") + k);
  };
  require("solver.dt");
  require("solver.t_end");
  if (rc.grid.euclid_dims > 0) {
    require("grid.points_euclid");
    require("grid.box_half_length");
  }
  if (rc.grid.torus_dims > 0) require("grid.points_torus");
  if (!p_exact_ok)
    fail(ErrorKind::config,
         "solver.p must be a decimal or rational literal (exact value is "
         "needed downstream)");

  if (rc.output.records.empty())
    rc.output.records = "records." + rc.output.format;
  rc.diag.m = rc.solver.m;
  rc.diag.p = rc.solver.p;
  rc.diag.lambda = rc.solver.lambda;
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::shared_ptr<const Grid> make_grid_from(const RunConfig& rc) {
  return make_grid(rc.grid);
}

MakeFieldResult build_initial(const RunConfig& rc,
                              const std::shared_ptr<const Grid>& grid) {
  const InitialConfig& ic = rc.initial;
  if (ic.kind == "gaussian") {
    GaussianSpec gs;
    gs.amplitude = ic.amplitude;
    gs.width = ic.width;
    gs.center = ic.center;
    gs.modulation = ic.modes;
    return make_gaussian(grid, gs);
  }
  MakeFieldResult out;
  if (ic.kind == "plane_wave") {
    std::vector<int> modes = ic.modes;
    if (modes.empty()) modes.assign(static_cast<std::size_t>(grid->axes), 0);
    out.field = make_plane_wave_modes(grid, modes, ic.amplitude);
    return out;
  }
  if (ic.kind == "random") {
    out.field = random_smooth_field(grid, rc.seed, ic.decay, ic.amplitude);
    return out;
  }
  // checkpoint
  if (ic.path.empty())
    fail(ErrorKind::config, "initial.path required for kind = checkpoint");
  out.field = load_checkpoint(ic.path);
  const Grid& g = out.field.grid();
  if (g.dims != grid->dims ||
      g.spec.box_half_length != grid->spec.box_half_length ||
      g.spec.torus_period != grid->spec.torus_period || g.d != grid->d ||
      g.n != grid->n)
    fail(ErrorKind::config,
         "checkpoint grid differs from the [grid] block");
  return out;
}

}  // namespace wgdl
