#include "npfb/reports.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "npfb/field_io.hpp"

namespace npfb {

namespace {

// JSON has no NaN or infinity; those become null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json node_array(const NodeIndex& node, int n) {
  Json a = Json::array();
  for (int i = 0; i < n; ++i) a.push_back(node[i]);
  return a;
}

Json point_array(const Point& x) {
  Json a = Json::array();
  for (int i = 0; i < x.size(); ++i) a.push_back(x[i]);
  return a;
}

}  // namespace

Json make_report(const std::string& check, Json params) {
  Json j;
  j["check"] = check;
  j["params"] = std::move(params);
  j["per_point"] = Json::array();
  j["summary"] = {{"min_margin", nullptr}, {"slope", nullptr}, {"delta_hat", nullptr}, {"C_hats", Json::object()}};
  j["witnesses"] = Json::array();
  j["passed"] = false;
  return j;
}

Json to_json(const NodeIndex& node, const SpaceTimeGrid& grid) {
  return {{"node", node_array(node, grid.dim())}, {"x", point_array(grid.position(node))}};
}

Json to_json(const GridIndex& idx, const SpaceTimeGrid& grid) {
  Json j = to_json(idx.node, grid);
  j["k"] = idx.k;
  j["t"] = grid.time(idx.k);
  return j;
}

Json to_json(const SolveReport& r) {
  double max_last = r.max_update.empty() ? 0.0 : r.max_update.back();
  return {{"steps", r.steps},
          {"substeps_per_level", r.substeps_per_level},
          {"dt", r.dt},
          {"cfl_ratio", r.cfl_ratio},
          {"last_max_update", num(max_last)},
          {"final_sup", num(r.final_sup)},
          {"min_unclamped", num(r.min_unclamped)},
          {"upsilon_observed", num(r.upsilon_observed)},
          {"phi_sup", num(r.phi_sup)},
          {"c_abp", num(r.c_abp)}};
}

Json to_json(const Barrier& b) {
  Json params = Json::object();
  for (const auto& [k, v] : b.params) params[k] = num(v);
  return {{"kind", to_string(b.kind)}, {"n", b.n},          {"p", b.p},
          {"center", point_array(b.center)}, {"t_ref", b.t_ref}, {"offset", b.offset},
          {"quad", b.quad},            {"time_coef", b.time_coef}, {"residual", b.residual},
          {"params", params}};
}

Json nondegeneracy_json(const NondegeneracyReport& r, const SpaceTimeGrid& grid, int k) {
  Json j = make_report("nondegeneracy", {{"mu0", r.mu0}, {"slack", r.slack}, {"k", k}, {"t", grid.time(k)}});
  const NondegeneracyEntry* worst = nullptr;
  for (const auto& e : r.entries) {
    j["per_point"].push_back({{"center", to_json(e.center, grid)},
                              {"r", e.r},
                              {"sup_boundary", e.sup_boundary},
                              {"u_center", e.u_center},
                              {"margin", e.margin},
                              {"passed", e.passed}});
    if (!worst || e.margin < worst->margin) worst = &e;
  }
  j["summary"]["min_margin"] = r.entries.empty() ? Json(nullptr) : num(r.min_margin);
  j["summary"]["min_ratio"] = r.entries.empty() ? Json(nullptr) : num(r.min_ratio);
  j["summary"]["pass_fraction"] = r.pass_fraction;
  j["summary"]["skipped_centers"] = r.skipped_centers;
  if (worst) j["witnesses"].push_back({{"center", to_json(worst->center, grid)}, {"r", worst->r}, {"margin", worst->margin}});
  return j;
}

Json growth_json(const GrowthStats& g, const SpaceTimeGrid& grid, double mu0_value) {
  Json j = make_report("growth", {{"k", g.k}, {"t", grid.time(g.k)}, {"mu0", mu0_value}});
  for (const auto& c : g.centers)
    j["per_point"].push_back({{"center", to_json(c.node, grid)}, {"r", c.r}, {"sup", c.sup}, {"slope", num(c.slope)}});
  if (!g.empty) {
    j["summary"]["slope"] = num(g.slope);
    j["summary"]["min_slope"] = num(g.min_slope);
    j["summary"]["max_slope"] = num(g.max_slope);
    j["summary"]["C_hats"] = {{"d0_hat", num(g.d0_hat)}, {"D0_hat", num(g.D0_hat)}};
  }
  return j;
}

Json porosity_json(const PorosityReport& r, const SpaceTimeGrid& grid) {
  Json j = make_report("porosity", {{"k", r.k}, {"t", r.t0}, {"radii", r.radii}});
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    Json ratios = Json::array();
    for (double v : r.ratio[i]) ratios.push_back(num(v));
    j["per_point"].push_back({{"center", to_json(r.points[i], grid)}, {"ratio", ratios}});
  }
  j["summary"]["delta_hat"] = r.evaluated ? num(r.delta_hat) : Json(nullptr);
  j["summary"]["fb_count"] = r.fb_count;
  j["summary"]["measure_proxy"] = r.measure_proxy;
  j["summary"]["evaluated"] = r.evaluated;
  if (r.evaluated) j["witnesses"].push_back({{"center", to_json(r.witness, grid)}, {"r", r.witness_radius}});
  return j;
}

Json doubling_json(const std::vector<std::pair<GridIndex, DoublingReport>>& reports,
                   const SpaceTimeGrid& grid) {
  Json j = make_report("doubling", Json::object());
  double worst_c1 = 0.0;
  for (const auto& [c, r] : reports) {
    j["per_point"].push_back({{"center", to_json(c, grid)}, {"M", r.M}, {"base_radius", r.base_radius},
                              {"S", r.S}, {"H", r.H}, {"C1", r.C1}, {"chain_length", r.chain_length},
                              {"chain_holds", r.chain_holds}, {"truncated", r.truncated},
                              {"warning", r.warning}});
    if (r.C1 >= worst_c1) {
      worst_c1 = r.C1;
      j["witnesses"] = Json::array({{{"center", to_json(c, grid)}, {"C1", r.C1}}});
    }
  }
  j["summary"]["C_hats"] = {{"C1_max", worst_c1}};
  return j;
}

Json growth_constant_json(const GrowthConstantReport& r, const SpaceTimeGrid& grid) {
  Json j = make_report("u-vs-d2", Json::object());
  j["summary"]["C_hats"] = {{"C0_hat", num(r.C0_hat)}};
  j["summary"]["evaluated"] = r.evaluated;
  if (r.evaluated) j["witnesses"].push_back(to_json(r.witness, grid));
  return j;
}

Json lip_json(const LipEstimate& r, const SpaceTimeGrid& grid) {
  Json j = make_report("lip", Json::object());
  j["summary"]["C_hats"] = {{"lip", num(r.value)}};
  j["summary"]["pairs"] = r.pairs;
  j["summary"]["exact"] = r.exact;
  j["witnesses"].push_back({{"a", to_json(r.a, grid)}, {"b", to_json(r.b, grid)}});
  return j;
}

Json time_holder_json(const TimeHolderReport& r, const SpaceTimeGrid& grid) {
  Json j = make_report("time-holder", Json::object());
  j["summary"]["C_hats"] = {{"C_hat", num(r.C_hat)}};
  j["summary"]["min_increment"] = num(r.min_increment);
  j["summary"]["monotone"] = r.monotone;
  j["witnesses"].push_back({{"a", to_json(r.a, grid)}, {"b", to_json(r.b, grid)}});
  j["witnesses"].push_back({{"min_increment_at", to_json(r.min_witness, grid)}});
  return j;
}

Json gradient_json(const GradientBands& bands, double L_bar, const GradientEnvelopeCheck& c,
                   const SpaceTimeGrid& grid) {
  Json j = make_report("gradient", {{"edges", bands.edges}});
  for (std::size_t b = 0; b < bands.maxima.size(); ++b)
    j["per_point"].push_back({{"band", {bands.edges[b], bands.edges[b + 1]}},
                              {"max_grad", num(bands.maxima[b])},
                              {"witness", to_json(bands.witnesses[b], grid)}});
  j["summary"]["C_hats"] = {{"L_bar", num(L_bar)}, {"worst_ratio", num(c.worst_ratio)}};
  j["summary"]["worst_band"] = c.worst_band;
  return j;
}

void write_growth_csv(const GrowthStats& g, const SpaceTimeGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (int a = 0; a < grid.dim(); ++a) out << 'i' << a + 1 << ',';
  out << "r,sup\n";
  for (const auto& c : g.centers)
    for (std::size_t i = 0; i < c.r.size(); ++i) {
      for (int a = 0; a < grid.dim(); ++a) out << c.node[a] << ',';
      out << c.r[i] << ',' << c.sup[i] << '\n';
    }
}

void write_doubling_csv(const std::vector<std::pair<GridIndex, DoublingReport>>& reports,
                        const SpaceTimeGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (int a = 0; a < grid.dim(); ++a) out << 'i' << a + 1 << ',';
  out << "k,j,r,S\n";
  for (const auto& [c, r] : reports)
    for (std::size_t jj = 0; jj < r.S.size(); ++jj) {
      for (int a = 0; a < grid.dim(); ++a) out << c.node[a] << ',';
      out << c.k << ',' << jj << ',' << r.base_radius * std::ldexp(1.0, -static_cast<int>(jj)) << ','
          << r.S[jj] << '\n';
    }
}

void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace npfb
