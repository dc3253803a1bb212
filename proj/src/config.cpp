#include "npfb/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace npfb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw ConfigError("expected a number, got '" + t + "'");
  return v;
}

long parse_integer(const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) throw ConfigError("expected an integer, got '" + t + "'");
  return v;
}

std::string format_list(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

using Setter = std::function<void(ProblemConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid.n", [](ProblemConfig& c, const std::string& v) { c.n = static_cast<int>(parse_integer(v)); }},
      {"grid.h", [](ProblemConfig& c, const std::string& v) { c.h = parse_double(v); }},
      {"grid.cells",
       [](ProblemConfig& c, const std::string& v) {
         const std::vector<double> xs = parse_number_list(v);
         if (xs.empty() || xs.size() > kMaxDim) throw ConfigError("cells needs 1 to 3 entries");
         for (int a = 0; a < kMaxDim; ++a) {
           const double x = xs[std::min<std::size_t>(a, xs.size() - 1)];
           if (x != std::floor(x)) throw ConfigError("cells must be integers");
           c.cells[a] = static_cast<int>(x);
         }
       }},
      {"grid.origin", [](ProblemConfig& c, const std::string& v) { c.origin = parse_number_list(v); }},
      {"grid.T", [](ProblemConfig& c, const std::string& v) { c.T = parse_double(v); }},
      {"grid.dt", [](ProblemConfig& c, const std::string& v) { c.dt = parse_double(v); }},
      {"pde_core.p", [](ProblemConfig& c, const std::string& v) { c.p = parse_double(v); }},
      {"pde_core.branch-normalization",
       [](ProblemConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t == "consistent") c.branch = BranchNormalization::consistent;
         else if (t == "paper-literal") c.branch = BranchNormalization::paper_literal;
         else throw ConfigError("branch-normalization must be consistent or paper-literal");
       }},
      {"perturbation.eps", [](ProblemConfig& c, const std::string& v) { c.eps = parse_number_list(v); }},
      {"perturbation.profile",
       [](ProblemConfig& c, const std::string& v) { c.profile = parse_zeta_profile(trim(v)); }},
      {"perturbation.f", [](ProblemConfig& c, const std::string& v) { c.f = trim(v); }},
      {"perturbation.c0", [](ProblemConfig& c, const std::string& v) { c.c0 = parse_double(v); }},
      {"perturbation.c1", [](ProblemConfig& c, const std::string& v) { c.c1 = parse_double(v); }},
      {"perturbation.grad_bound", [](ProblemConfig& c, const std::string& v) { c.grad_bound = parse_double(v); }},
      {"perturbation.phi", [](ProblemConfig& c, const std::string& v) { c.phi = trim(v); }},
      {"perturbation.ramp", [](ProblemConfig& c, const std::string& v) { c.ramp = trim(v); }},
      {"solver.delta", [](ProblemConfig& c, const std::string& v) { c.delta = parse_number_list(v); }},
      {"solver.cfl_safety", [](ProblemConfig& c, const std::string& v) { c.cfl_safety = parse_double(v); }},
      {"fb_analysis.kappa", [](ProblemConfig& c, const std::string& v) { c.kappa = parse_double(v); }},
      {"fb_analysis.radii",
       [](ProblemConfig& c, const std::string& v) {
         c.radii = trim(v) == "auto" ? std::vector<double>{} : parse_number_list(v);
       }},
      {"fb_analysis.t0",
       [](ProblemConfig& c, const std::string& v) {
         if (trim(v) == "auto") c.t0.reset();
         else c.t0 = parse_double(v);
       }},
      {"fb_analysis.k_margin", [](ProblemConfig& c, const std::string& v) { c.k_margin = parse_double(v); }},
      {"fb_analysis.sample_budget",
       [](ProblemConfig& c, const std::string& v) {
         const long b = parse_integer(v);
         if (b < 1) throw ConfigError("sample_budget must be positive");
         c.sample_budget = static_cast<std::size_t>(b);
       }},
      {"fb_analysis.slack", [](ProblemConfig& c, const std::string& v) { c.slack = parse_double(v); }},
      {"cli.out_dir", [](ProblemConfig& c, const std::string& v) { c.out_dir = trim(v); }},
      {"cli.seed",
       [](ProblemConfig& c, const std::string& v) {
         const long s = parse_integer(v);
         if (s < 0) throw ConfigError("seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"cli.slice_stride",
       [](ProblemConfig& c, const std::string& v) { c.slice_stride = static_cast<int>(parse_integer(v)); }},
      {"cli.slice_format",
       [](ProblemConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t != "binary" && t != "csv") throw ConfigError("slice_format must be binary or csv");
         c.slice_format = t;
       }},
      {"cli.dump_all",
       [](ProblemConfig& c, const std::string& v) {
         const std::string t = trim(v);
         if (t == "true" || t == "1") c.dump_all = true;
         else if (t == "false" || t == "0") c.dump_all = false;
         else throw ConfigError("dump_all must be true or false");
       }},
      {"sweep.p", [](ProblemConfig& c, const std::string& v) { c.sweep_p = parse_number_list(v); }},
      {"sweep.eps", [](ProblemConfig& c, const std::string& v) { c.sweep_eps = parse_number_list(v); }},
      {"sweep.h", [](ProblemConfig& c, const std::string& v) { c.sweep_h = parse_number_list(v); }},
  };
  return table;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  if (out.empty()) throw ConfigError("expected a comma-separated list of numbers");
  return out;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

ConfigEntries parse_config_text(const std::string& text, const std::string& source) {
  ConfigEntries out;
  out.source = source;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigFileError(source + ":" + std::to_string(number) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of any section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!setters().count(key)) fail("unknown key '" + key + "'");
    if (out.values.count(key)) fail("duplicate key '" + key + "'");
    out.values[key] = {value, number};
  }
  return out;
}

ConfigEntries read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void apply_entries(ProblemConfig& cfg, const ConfigEntries& entries) {
  for (const auto& [key, entry] : entries.values) {
    const auto it = setters().find(key);
    const std::string where =
        entry.second > 0 ? entries.source + ":" + std::to_string(entry.second) : entries.source;
    if (it == setters().end()) throw ConfigFileError(where + ": unknown key '" + key + "'");
    try {
      it->second(cfg, entry.first);
    } catch (const ConfigFileError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigFileError(where + ": " + key + ": " + e.what());
    }
  }
}

ConfigEntries environment_entries() {
  ConfigEntries out;
  out.source = "environment";
  for (const std::string& key : known_keys()) {
    std::string var = "NPFB_" + key;
    for (char& ch : var) {
      if (ch == '.' || ch == '-') ch = '_';
      ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    if (const char* v = std::getenv(var.c_str())) out.values[key] = {v, 0};
  }
  return out;
}

SpaceTimeGrid ProblemConfig::grid() const {
  Point o = Point::Zero(n);
  for (int a = 0; a < n && a < static_cast<int>(origin.size()); ++a) o[a] = origin[a];
  return SpaceTimeGrid(n, h, dt, cells, o, T);
}

ForcingSpec ProblemConfig::forcing() const {
  return ForcingSpec{c0, c1, Expression::parse(f, n), grad_bound};
}

BoundaryDataSpec ProblemConfig::boundary() const {
  return BoundaryDataSpec{Expression::parse(phi, n), Expression::parse(ramp, n)};
}

Problem ProblemConfig::problem(double eps_value, double delta_value) const {
  return Problem{grid(), OperatorParams<double>{p, delta_value, n, branch},
                 ZetaFamily{eps_value, profile}, forcing(), boundary(), cfl_safety};
}

int ProblemConfig::analysis_level(const SpaceTimeGrid& g) const {
  if (!t0) return g.last_level() - 1;
  const long k = std::lround(*t0 / g.dt());
  if (std::abs(k * g.dt() - *t0) > 1e-9 * g.dt() || k < 1 || k >= g.last_level())
    throw ConfigError("t0 must be an interior retained slice");
  return static_cast<int>(k);
}

void ProblemConfig::validate() const {
  try {
    OperatorParams<double>{p, 0.0, n, branch}.validate();
  } catch (const OperatorError& e) {
    throw ConfigError(e.what());
  }
  check_schedule("eps", eps);
  check_schedule("delta", delta);
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("cfl_safety must be in (0, 1]");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(slack > 0.0)) throw ConfigError("slack must be positive");
  if (slice_stride < 0) throw ConfigError("slice_stride must be non-negative");
  if (!(c0 > 0.0) || c1 < c0) throw ConfigError("forcing bounds need 0 < c0 <= c1");
  for (double r : radii)
    if (!(r > 0.0)) throw ConfigError("radii must be positive");
  for (double v : sweep_p)
    if (!(v > 1.0)) throw ConfigError("p must exceed 1");
  for (double v : sweep_eps)
    if (!(v > 0.0)) throw ConfigError("sweep eps must be positive");
  for (double v : sweep_h)
    if (!(v > 0.0)) throw ConfigError("sweep h must be positive");
  try {
    const SpaceTimeGrid g = grid();
    analysis_level(g);
  } catch (const GridError& e) {
    throw ConfigError(e.what());
  }
  try {
    forcing();
    boundary();
  } catch (const ExpressionError& e) {
    throw ConfigError(e.what());
  }
}

std::string ProblemConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  // Only the axes in use, so "cells = 128, 128" and the default hash alike.
  std::vector<double> used_cells, used_origin;
  for (int a = 0; a < n; ++a) {
    used_cells.push_back(cells[a]);
    used_origin.push_back(a < static_cast<int>(origin.size()) ? origin[a] : 0.0);
  }
  os << "grid.n=" << n << "\ngrid.h=" << h << "\ngrid.cells=" << format_list(used_cells)
     << "\ngrid.origin=" << format_list(used_origin) << "\ngrid.T=" << T << "\ngrid.dt=" << dt
     << "\npde_core.p=" << p << "\npde_core.branch-normalization="
     << (branch == BranchNormalization::consistent ? "consistent" : "paper-literal")
     << "\nperturbation.eps=" << format_list(eps) << "\nperturbation.profile=" << to_string(profile)
     << "\nperturbation.f=" << f << "\nperturbation.c0=" << c0 << "\nperturbation.c1=" << c1
     << "\nperturbation.grad_bound=" << grad_bound << "\nperturbation.phi=" << phi
     << "\nperturbation.ramp=" << ramp << "\nsolver.delta=" << format_list(delta)
     << "\nsolver.cfl_safety=" << cfl_safety << "\nfb_analysis.kappa=" << kappa
     << "\nfb_analysis.radii=" << (radii.empty() ? "auto" : format_list(radii))
     << "\nfb_analysis.t0=";
  if (t0) os << *t0;
  else os << "auto";
  os << "\nfb_analysis.k_margin=" << k_margin << "\nfb_analysis.sample_budget=" << sample_budget
     << "\nfb_analysis.slack=" << slack << "\ncli.seed=" << seed << "\ncli.slice_stride=" << slice_stride
     << "\ncli.slice_format=" << slice_format << "\ncli.dump_all=" << dump_all
     << "\nsweep.p=" << format_list(sweep_p) << "\nsweep.eps=" << format_list(sweep_eps)
     << "\nsweep.h=" << format_list(sweep_h) << "\n";
  return os.str();
}

ProblemConfig load_config(const std::optional<std::string>& path,
                          const std::map<std::string, std::string>& flag_overrides) {
  ProblemConfig cfg;
  if (path) apply_entries(cfg, read_config_file(*path));
  apply_entries(cfg, environment_entries());
  ConfigEntries flags;
  flags.source = "command line";
  for (const auto& [k, v] : flag_overrides) flags.values[k] = {v, 0};
  apply_entries(cfg, flags);
  try {
    cfg.validate();
  } catch (const ConfigFileError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigFileError((path ? *path : std::string("config")) + ": " + e.what());
  }
  return cfg;
}

}  // namespace npfb
