#include "npfb/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "npfb/barriers.hpp"
#include "npfb/fb_analysis.hpp"
#include "npfb/field_io.hpp"
#include "npfb/manifest.hpp"
#include "npfb/solver.hpp"

namespace npfb {

namespace fs = std::filesystem;

namespace {

std::ostream& logger(const CommandOptions& opts) {
  static std::ostringstream sink;
  return opts.log ? *opts.log : sink;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string level_tag(int k) {
  std::ostringstream os;
  os << std::setw(5) << std::setfill('0') << k;
  return os.str();
}

std::vector<double> analysis_radii(const ProblemConfig& cfg, const SpaceTimeGrid& g) {
  if (!cfg.radii.empty()) return cfg.radii;
  double extent = 0.0;
  for (int a = 0; a < g.dim(); ++a) extent = std::max(extent, g.cells(a) * g.h());
  return dyadic_radii(g.h(), 0.5 * extent);
}

SubGrid compact_set(const ProblemConfig& cfg, const SpaceTimeGrid& g) {
  return SubGrid::interior_box(g, cfg.k_margin, 0, g.last_level() - 1);
}

std::vector<double> gradient_edges(const SpaceTimeGrid& g) {
  double top = std::sqrt(g.final_time());
  for (int a = 0; a < g.dim(); ++a) top = std::min(top, 0.5 * g.cells(a) * g.h());
  std::vector<double> edges;
  for (double e = 2.0 * g.h(); e < top; e *= 2.0) edges.push_back(e);
  edges.push_back(top * (1.0 + 1e-9));
  return edges;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

const std::vector<std::string>& available_checks() {
  static const std::vector<std::string> names = {"nondegeneracy", "growth", "porosity", "doubling",
                                                 "u-vs-d2",       "lip",    "time-holder", "gradient"};
  return names;
}

CheckOutcome run_check(const std::string& name, const Field& field, const ProblemConfig& cfg,
                       const std::string& out_dir) {
  const SpaceTimeGrid& g = field.grid();
  const int k = cfg.analysis_level(g);
  const double theta = fb_threshold(g.h(), cfg.kappa);
  const double p = field.metadata().p > 1.0 ? field.metadata().p : cfg.p;
  const std::vector<double> radii = analysis_radii(cfg, g);
  CheckOutcome out;
  out.name = name;
  auto fbset = [&] { return extract_positivity(field, k, theta); };
  Json common = {{"kappa", cfg.kappa}, {"theta", theta}, {"p", p}, {"n", g.dim()},
                 {"h", g.h()},         {"eps", field.metadata().eps}, {"delta", field.metadata().delta}};

  if (name == "nondegeneracy") {
    const auto rep = nondegeneracy_check(field, fbset(), cfg.c0, p, g.dim(), radii, cfg.slack);
    out.report = nondegeneracy_json(rep, g, k);
    out.passed = !rep.entries.empty() && rep.pass_fraction == 1.0;
  } else if (name == "growth") {
    const auto st = growth_upper_check(field, fbset(), radii);
    const double m0 = mu0(cfg.c0, p, g.dim());
    out.report = growth_json(st, g, m0);
    out.passed = !st.empty && st.slope >= 1.7 && st.slope <= 2.3 && st.d0_hat >= 0.5 * m0;
    write_growth_csv(st, g, (fs::path(out_dir) / "growth.csv").string());
    out.files.push_back("growth.csv");
  } else if (name == "porosity") {
    const auto rep = porosity_estimate(fbset(), g, radii);
    out.report = porosity_json(rep, g);
    out.passed = rep.evaluated > 0 && rep.delta_hat > 0.0;
  } else if (name == "doubling") {
    const PositivitySet fb = fbset();
    const double m0 = mu0(cfg.c0, p, g.dim());
    std::vector<std::pair<GridIndex, DoublingReport>> reps;
    const std::size_t stride = std::max<std::size_t>(1, fb.fb.size() / 16);
    for (std::size_t i = 0; i < fb.fb.size(); i += stride) {
      const GridIndex c{g.unflat(fb.fb[i]), k};
      const double cap = 0.5 * g.parabolic_distance(c);
      double R = 0.0;
      for (double r : dyadic_radii(g.h(), cap)) R = r;
      if (R < 8.0 * g.h() * (1.0 - 1e-12)) continue;
      const int j_max = static_cast<int>(std::floor(std::log2(R / (4.0 * g.h())) + 1e-9)) - 1;
      reps.emplace_back(c, doubling_set(field, g.position(c.node), g.time(k), m0, R, j_max));
    }
    out.report = doubling_json(reps, g);
    out.passed = !reps.empty() &&
                 std::all_of(reps.begin(), reps.end(), [](const auto& r) { return r.second.chain_length >= 0; });
    write_doubling_csv(reps, g, (fs::path(out_dir) / "doubling.csv").string());
    out.files.push_back("doubling.csv");
  } else if (name == "u-vs-d2") {
    const auto rep = u_vs_d2_check(field, theta, compact_set(cfg, g));
    out.report = growth_constant_json(rep, g);
    out.passed = rep.evaluated > 0 && finite(rep.C0_hat);
  } else if (name == "lip") {
    const auto rep = lip_seminorm(field, compact_set(cfg, g), cfg.sample_budget, cfg.seed);
    out.report = lip_json(rep, g);
    out.passed = finite(rep.value);
  } else if (name == "time-holder") {
    const auto rep = time_holder_check(field, compact_set(cfg, g));
    out.report = time_holder_json(rep, g);
    out.passed = rep.monotone && finite(rep.C_hat);
  } else if (name == "gradient") {
    const auto bands = gradient_bands(field, gradient_edges(g));
    const double L_bar = fit_gradient_envelope(bands);
    const auto chk = gradient_bound_check(bands, L_bar);
    out.report = gradient_json(bands, L_bar, chk, g);
    out.passed = finite(L_bar) && chk.passed;
  } else {
    throw ConfigError("unknown check '" + name + "'");
  }
  if (out.report["per_point"].empty() && (name == "nondegeneracy" || name == "growth" || name == "doubling"))
    out.report["summary"]["warning"] = "unresolved: no free-boundary center admits a radius in [4h, dist/2]";
  for (auto& [key, value] : common.items())
    if (!out.report["params"].contains(key)) out.report["params"][key] = value;
  out.report["passed"] = out.passed;
  const std::string file = "report_" + name + ".json";
  write_json(out.report, (fs::path(out_dir) / file).string());
  out.files.insert(out.files.begin(), file);
  return out;
}

namespace {

ProblemConfig load(const CommandOptions& opts) { return load_config(opts.config_path, opts.overrides); }

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

// Maps the exception families to the exit-code contract.
template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const InstabilityError& e) {
    std::cerr << "error: solver instability: " << e.what() << '\n';
    return kExitInstability;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
}

void write_checkpoints(const Field& field, const ProblemConfig& cfg, RunManifest& manifest,
                       const std::string& tag) {
  if (cfg.slice_stride == 0) return;
  const std::string dir = "slices";
  prepare_out_dir(manifest.path(dir));
  const int last = field.grid().last_level();
  for (int k = 0; k <= last; k += cfg.slice_stride) {
    const std::string base = dir + "/" + tag + "_k" + level_tag(k);
    if (cfg.slice_format == "csv") {
      write_slice_csv(field, k, manifest.path(base + ".csv"));
      manifest.add(base + ".csv", "checkpoint");
    } else {
      write_bytes(manifest.path(base + ".npfb"), encode_slice(field, k));
      manifest.add(base + ".npfb", "checkpoint");
    }
  }
}

}  // namespace

int cmd_solve(const CommandOptions& opts) {
  return guarded([&] {
    const ProblemConfig cfg = load(opts);
    std::ostream& log = logger(opts);
    prepare_out_dir(cfg.out_dir);
    const std::string hash = sha256_hex(cfg.canonical());
    RunManifest manifest(cfg.out_dir, "solve", hash);
    write_text(manifest.path("config.resolved"), cfg.canonical());
    manifest.add("config.resolved", "config");

    const Problem base = cfg.problem(cfg.eps.front(), cfg.delta.front());
    const SubGrid K = compact_set(cfg, base.grid);
    log << "solve: " << cfg.eps.size() << " eps x " << cfg.delta.size() << " delta runs, h=" << fmt(cfg.h)
        << ", p=" << fmt(cfg.p) << '\n';
    const ContinuationResult cont =
        continuation_run(base, cfg.delta, cfg.eps, K, cfg.sample_budget, cfg.seed);

    Json runs = Json::array();
    for (std::size_t i = 0; i < cont.runs.size(); ++i) {
      const ContinuationEntry& e = cont.runs[i];
      const bool last = i + 1 == cont.runs.size();
      const std::size_t ie = i / cfg.delta.size(), id = i % cfg.delta.size();
      const std::string tag = "e" + std::to_string(ie) + "_d" + std::to_string(id);
      Json r = {{"eps", e.eps}, {"delta", e.delta}, {"tag", tag}, {"solve", to_json(e.report)},
                {"compared_with", e.compared_with}, {"sup_distance", e.sup_distance}, {"lip", e.lip}};
      if (cfg.dump_all || last) {
        const std::string name = last ? "field.npfb" : "field_" + tag + ".npfb";
        save_field(e.field, manifest.path(name));
        manifest.add(name, "solve");
        r["dump"] = name;
        write_checkpoints(e.field, cfg, manifest, tag);
      }
      log << "  eps=" << fmt(e.eps) << " delta=" << fmt(e.delta) << " steps=" << e.report.steps
          << " upsilon=" << fmt(e.report.upsilon_observed) << " min_raw=" << fmt(e.report.min_unclamped)
          << " wall=" << fmt(e.report.wall_seconds) << "s";
      if (e.compared_with >= 0) log << " |du|=" << fmt(e.sup_distance);
      log << '\n';
      runs.push_back(r);
    }
    Json report = {{"config_hash", hash}, {"tool_version", kToolVersion}, {"runs", runs}};
    write_json(report, manifest.path("solve_report.json"));
    manifest.add("solve_report.json", "report");
    manifest.write(kExitOk);
    return static_cast<int>(kExitOk);
  });
}

int cmd_analyze(const CommandOptions& opts) {
  return guarded([&] {
    for (const std::string& c : opts.checks)
      if (std::find(available_checks().begin(), available_checks().end(), c) == available_checks().end())
        throw ConfigError("unknown check '" + c + "'");
    if (!opts.field_path) throw ConfigError("analyze needs --field");
    ProblemConfig cfg = load(opts);
    const Field field = load_field(*opts.field_path);
    if (opts.config_path) {
      if (!(cfg.grid() == field.grid())) throw IoError("field dump grid does not match the config grid");
      if (field.metadata().p != cfg.p) throw IoError("field dump p does not match the config p");
    } else {
      cfg.n = field.grid().dim();
      cfg.p = field.metadata().p;
    }
    if (!field.all_finite()) throw IoError("field dump holds non-finite values");
    std::ostream& log = logger(opts);
    if (opts.checks.empty()) {
      log << "analyze: no checks requested\n";
      return static_cast<int>(kExitOk);
    }
    prepare_out_dir(cfg.out_dir);
    RunManifest manifest(cfg.out_dir, "analyze", sha256_hex(cfg.canonical()));
    bool all = true;
    for (const std::string& c : opts.checks) {
      const CheckOutcome o = run_check(c, field, cfg, cfg.out_dir);
      for (const std::string& f : o.files) manifest.add(f, "report");
      log << "  " << c << ": " << (o.passed ? "pass" : "FAIL") << '\n';
      all = all && o.passed;
    }
    const int code = all ? kExitOk : kExitCheckFailed;
    manifest.write(code);
    return code;
  });
}

int cmd_verify_barriers(const CommandOptions& opts) {
  return guarded([&] {
    const ProblemConfig cfg = load(opts);
    std::ostream& log = logger(opts);
    prepare_out_dir(cfg.out_dir);
    RunManifest manifest(cfg.out_dir, "verify-barriers", sha256_hex(cfg.canonical()));

    const double delta = 1e-10;
    const double tol = 1e-6 + 10.0 * delta;
    const std::array<double, 5> ps{1.05, 1.5, 2.0, 3.0, 10.0};
    const std::array<int, 3> cells_for_dim{64, 24, 10};
    Json table = Json::array();
    bool all = true;
    for (int n = 1; n <= 3; ++n) {
      const int cells = cells_for_dim[static_cast<std::size_t>(n - 1)];
      const double h = 2.0 / cells;
      std::array<int, kMaxDim> c{cells, cells, cells};
      const SpaceTimeGrid grid(n, h, 1e-3, c, Point::Constant(n, -1.0), 4e-3);
      for (double p : ps) {
        const OperatorParams<double> params{p, delta, n, cfg.branch};
        const auto [hp, hm] = h_barriers(1.0, 2.0, 0.5, p, n, 0.0);
        const std::array<Barrier, 4> barriers{psi_barrier(Point::Zero(n), grid.final_time(), cfg.c0, p, n), hp, hm,
                                             omega_barrier(1.0, p, n, opts.mutate_omega)};
        for (const Barrier& b : barriers) {
          const ResidualCheck rc = check_residual(b, grid, params, tol, 2.0 * h);
          all = all && rc.passed;
          table.push_back({{"barrier", to_json(b)}, {"h", h}, {"delta", delta}, {"tol", tol},
                           {"max_error", rc.max_error}, {"checked", rc.checked},
                           {"witness", to_json(rc.witness, grid)}, {"passed", rc.passed}});
          log << "  " << std::left << std::setw(8) << to_string(b.kind) << " n=" << n << " p=" << std::setw(5)
              << fmt(p) << " max|err|=" << std::setw(12) << fmt(rc.max_error) << (rc.passed ? " ok" : " FAIL")
              << '\n';
        }
      }
    }
    Json report = make_report("verify-barriers", {{"delta", delta}, {"tol", tol}, {"mutate_omega", opts.mutate_omega}});
    report["per_point"] = table;
    report["passed"] = all;
    write_json(report, manifest.path("verify_barriers.json"));
    manifest.add("verify_barriers.json", "report");
    const int code = all ? kExitOk : kExitCheckFailed;
    manifest.write(code);
    return code;
  });
}

int cmd_sweep(const CommandOptions& opts) {
  return guarded([&] {
    const ProblemConfig cfg = load(opts);
    std::ostream& log = logger(opts);
    std::vector<std::string> checks = opts.checks;
    if (checks.empty()) checks = {"nondegeneracy", "growth", "porosity"};
    for (const std::string& c : checks)
      if (std::find(available_checks().begin(), available_checks().end(), c) == available_checks().end())
        throw ConfigError("unknown check '" + c + "'");
    prepare_out_dir(cfg.out_dir);
    RunManifest manifest(cfg.out_dir, "sweep", sha256_hex(cfg.canonical()));

    std::ofstream csv(manifest.path("sweep.csv"), std::ios::trunc);
    if (!csv) throw IoError("cannot write sweep.csv");
    csv << std::setprecision(10) << "p,eps,h,upsilon,min_unclamped";
    for (const std::string& c : checks) csv << ',' << c;
    csv << '\n';

    Json rows = Json::array();
    bool all = true;
    int run = 0;
    for (double h : cfg.sweep_h)
      for (double p : cfg.sweep_p)
        for (double eps : cfg.sweep_eps) {
          ProblemConfig c = cfg;
          c.p = p;
          c.eps = {eps};
          c.delta = {cfg.delta.back()};
          for (int a = 0; a < kMaxDim; ++a) c.cells[a] = static_cast<int>(std::lround(cfg.cells[a] * cfg.h / h));
          c.h = h;
          c.validate();
          const SolveResult res = solve(c.problem(eps, c.delta.front()));
          const std::string dir = "run" + std::to_string(run++);
          prepare_out_dir(manifest.path(dir));
          Json row = {{"p", p}, {"eps", eps}, {"h", h}, {"dir", dir}, {"solve", to_json(res.report)}};
          csv << p << ',' << eps << ',' << h << ',' << res.report.upsilon_observed << ','
              << res.report.min_unclamped;
          for (const std::string& name : checks) {
            const CheckOutcome o = run_check(name, res.field, c, manifest.path(dir));
            for (const std::string& f : o.files) manifest.add(dir + "/" + f, "report");
            row["checks"][name] = {{"passed", o.passed}, {"summary", o.report["summary"]}};
            csv << ',' << (o.passed ? 1 : 0);
            all = all && o.passed;
          }
          csv << '\n';
          log << "  p=" << fmt(p) << " eps=" << fmt(eps) << " h=" << fmt(h) << " wall=" << fmt(res.report.wall_seconds)
              << "s\n";
          rows.push_back(row);
        }
    csv.close();
    manifest.add("sweep.csv", "report");
    write_json(Json{{"runs", rows}, {"checks", checks}}, manifest.path("sweep.json"));
    manifest.add("sweep.json", "report");
    const int code = all ? kExitOk : kExitCheckFailed;
    manifest.write(code);
    return code;
  });
}

}  // namespace npfb
