#include "npfb/fb_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace npfb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Index at(std::size_t f) { return static_cast<Eigen::Index>(f); }

void check_cylinder_inside(const SpaceTimeGrid& grid, const Point& z, double s, double r) {
  for (int a = 0; a < grid.dim(); ++a) {
    const double lo = grid.origin()[a];
    const double hi = lo + grid.cells(a) * grid.h();
    if (z[a] - r < lo - 1e-12 || z[a] + r > hi + 1e-12)
      throw GridError("cylinder leaves the spatial box");
  }
  if (s - r * r < -1e-12 * std::max(1.0, s) || s > grid.final_time() + 1e-12)
    throw GridError("cylinder leaves the time interval");
}

double ball_sup(const double* slice, const SpaceTimeGrid& grid, const Point& x, double r) {
  double best = -kInf;
  for_each_ball_node(grid, x, r, [&](const NodeIndex& node) {
    best = std::max(best, slice[grid.flat(node)]);
  });
  return best;
}

}  // namespace

std::vector<double> dyadic_radii(double h, double cap) {
  std::vector<double> out;
  for (double r = 4.0 * h; r <= cap * (1.0 + 1e-12); r *= 2.0) out.push_back(r);
  return out;
}

double mu0(double c0, double p, int n) {
  return std::min(p * c0 / (4.0 * (n + p - 2.0)), c0 / 2.0);
}

PositivitySet extract_positivity(const Field& field, int k, double theta) {
  const SpaceTimeGrid& grid = field.grid();
  if (k < 0 || k > grid.last_level()) throw GridError("slice index out of range");
  const auto slice = field.slice(k);
  PositivitySet out;
  out.k = k;
  out.threshold = theta;
  out.mask.resize(grid.node_count());
  for (std::size_t f = 0; f < grid.node_count(); ++f) out.mask[f] = slice[at(f)] > theta;
  for (std::size_t f = 0; f < grid.node_count(); ++f) {
    if (!out.mask[f]) continue;
    const NodeIndex node = grid.unflat(f);
    bool edge = false;
    for (int a = 0; a < grid.dim() && !edge; ++a) {
      if (node[a] > 0 && !out.mask[f - grid.stride(a)]) edge = true;
      if (node[a] < grid.cells(a) && !out.mask[f + grid.stride(a)]) edge = true;
    }
    if (edge) out.fb.push_back(f);
  }
  return out;
}

double sup_cylinder(const Field& field, const Point& z, double s, double r) {
  const SpaceTimeGrid& grid = field.grid();
  check_cylinder_inside(grid, z, s, r);
  const PointSet pts = cylinder_points(grid, ParabolicCylinder{z, s, r, ParabolicCylinder::Kind::lower});
  double best = -kInf;
  for (std::size_t f : pts) best = std::max(best, field.at(f));
  return best;
}

DoublingReport doubling_set(const Field& field, const Point& z, double s, double mu0_value,
                            double base_radius, int j_max) {
  const double h = field.grid().h();
  DoublingReport rep;
  rep.M = 4.0 * std::max(1.0, 1.0 / mu0_value);
  rep.base_radius = base_radius;
  std::vector<double> raw;
  for (int j = 0; j <= j_max + 1; ++j) {
    const double r = base_radius * std::ldexp(1.0, -j);
    if (r < 4.0 * h * (1.0 - 1e-12)) {
      rep.truncated = true;
      rep.warning = "radii below 4h dropped from j = " + std::to_string(j);
      break;
    }
    raw.push_back(sup_cylinder(field, z, s, r));
  }
  const double norm = raw.empty() ? 0.0 : raw.front();
  for (double v : raw) rep.S.push_back(norm > 0.0 ? v / norm : 0.0);

  for (std::size_t j = 0; j + 1 < rep.S.size(); ++j) {
    if (rep.S[j] <= rep.M * rep.S[j + 1] * (1.0 + 1e-12)) rep.H.push_back(static_cast<int>(j));
    rep.C1 = std::max(rep.C1, rep.S[j + 1] * std::ldexp(1.0, 2 * static_cast<int>(j)));
  }
  for (int j : rep.H) {
    if (j != rep.chain_length + 1) break;
    rep.chain_length = j;
  }
  for (int j = 0; j <= rep.chain_length; ++j)
    if (rep.S[static_cast<std::size_t>(j)] > 4.0 * rep.C1 * std::ldexp(1.0, -2 * j) * (1.0 + 1e-12))
      rep.chain_holds = false;
  return rep;
}

NondegeneracyReport nondegeneracy_check(const Field& field, const PositivitySet& fbset, double c0,
                                        double p, int n, std::span<const double> radii,
                                        double slack) {
  const SpaceTimeGrid& grid = field.grid();
  NondegeneracyReport rep;
  rep.mu0 = mu0(c0, p, n);
  rep.slack = slack;
  rep.min_margin = kInf;
  rep.min_ratio = kInf;
  const double s = grid.time(fbset.k);
  std::size_t passed = 0;
  for (std::size_t f : fbset.fb) {
    const NodeIndex node = grid.unflat(f);
    const GridIndex center{node, fbset.k};
    const double cap = 0.5 * grid.parabolic_distance(center);
    const Point z = grid.position(node);
    const double uc = field(center);
    bool any = false;
    for (double r : radii) {
      if (r > cap * (1.0 + 1e-12)) continue;
      any = true;
      check_cylinder_inside(grid, z, s, r);
      const PointSet pts =
          cylinder_points(grid, ParabolicCylinder{z, s, r, ParabolicCylinder::Kind::lower});
      const int k_bottom = grid.unflat_spacetime(pts.front()).k;
      double sup = -kInf;
      for (std::size_t g : pts) {
        const GridIndex idx = grid.unflat_spacetime(g);
        const double dist = (grid.position(idx.node) - z).norm();
        if (idx.k == k_bottom || dist >= r - grid.h() * (1.0 + 1e-12))
          sup = std::max(sup, field.at(g));
      }
      NondegeneracyEntry e{center, r, sup, uc, sup - uc - rep.mu0 * r * r, false};
      e.passed = sup - uc >= slack * rep.mu0 * r * r;
      passed += e.passed;
      rep.min_margin = std::min(rep.min_margin, e.margin);
      rep.min_ratio = std::min(rep.min_ratio, (sup - uc) / (rep.mu0 * r * r));
      rep.entries.push_back(e);
    }
    if (!any) ++rep.skipped_centers;
  }
  if (rep.entries.empty()) {
    rep.min_margin = 0.0;
    rep.min_ratio = 0.0;
    rep.pass_fraction = 0.0;
  } else {
    rep.pass_fraction = static_cast<double>(passed) / rep.entries.size();
  }
  return rep;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

GrowthStats growth_upper_check(const Field& field, const PositivitySet& fbset,
                               std::span<const double> radii) {
  const SpaceTimeGrid& grid = field.grid();
  GrowthStats st;
  st.k = fbset.k;
  const double* slice = field.slice(fbset.k).data();
  double sxy = 0.0, sxx = 0.0;
  st.d0_hat = kInf;
  st.min_slope = kInf;
  st.max_slope = -kInf;
  for (std::size_t f : fbset.fb) {
    const NodeIndex node = grid.unflat(f);
    const double cap = 0.5 * grid.parabolic_distance(GridIndex{node, fbset.k});
    GrowthCenter c;
    c.node = node;
    const Point x = grid.position(node);
    for (double r : radii) {
      if (r < 4.0 * grid.h() * (1.0 - 1e-12) || r > cap * (1.0 + 1e-12)) continue;
      c.r.push_back(r);
      c.sup.push_back(ball_sup(slice, grid, x, r));
    }
    if (c.r.size() < 2) continue;
    c.slope = loglog_slope(c.r, c.sup);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < c.r.size(); ++i) {
      mx += std::log(c.r[i]);
      my += std::log(c.sup[i]);
      st.d0_hat = std::min(st.d0_hat, c.sup[i] / (c.r[i] * c.r[i]));
      st.D0_hat = std::max(st.D0_hat, c.sup[i] / (c.r[i] * c.r[i]));
    }
    mx /= c.r.size();
    my /= c.r.size();
    for (std::size_t i = 0; i < c.r.size(); ++i) {
      const double dx = std::log(c.r[i]) - mx;
      sxy += dx * (std::log(c.sup[i]) - my);
      sxx += dx * dx;
    }
    st.min_slope = std::min(st.min_slope, c.slope);
    st.max_slope = std::max(st.max_slope, c.slope);
    st.centers.push_back(std::move(c));
  }
  st.empty = st.centers.empty();
  if (st.empty) {
    st.d0_hat = st.min_slope = st.max_slope = 0.0;
    st.slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    st.slope = sxy / sxx;
  }
  return st;
}

namespace {

double distance_cap(const SpaceTimeGrid& grid) {
  double diag2 = 0.0;
  for (int a = 0; a < grid.dim(); ++a) diag2 += std::pow(grid.cells(a) * grid.h(), 2);
  return std::max(std::sqrt(diag2), std::sqrt(grid.final_time()));
}

}  // namespace

double caloric_distance(const Field& field, double theta, const GridIndex& idx) {
  const SpaceTimeGrid& grid = field.grid();
  if (!grid.contains(idx)) throw GridError("grid index out of range");
  if (!(field(idx) > theta)) return 0.0;
  const Point x = grid.position(idx.node);
  const double t = grid.time(idx.k);
  auto inside = [&](double r) {
    for (std::size_t f : cylinder_points(grid, ParabolicCylinder{x, t, r, ParabolicCylinder::Kind::full}))
      if (!(field.at(f) > theta)) return false;
    return true;
  };
  double lo = 0.0, hi = distance_cap(grid);
  if (inside(hi)) return hi;
  while (hi - lo > 0.5 * grid.h()) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

namespace {

// Lower envelope of parabolas (Felzenszwalb and Huttenlocher), unit spacing.
void squared_dt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                   std::vector<double>& z) {
  const int m = static_cast<int>(f.size());
  v.assign(m, 0);
  z.assign(m + 1, 0.0);
  d.assign(m, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  auto meet = [&](int q, int r) {
    return ((f[q] + double(q) * q) - (f[r] + double(r) * r)) / (2.0 * (q - r));
  };
  for (int q = 1; q < m; ++q) {
    double s = meet(q, v[k]);
    while (s <= z[k]) s = meet(q, v[--k]);
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < m; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> distance_transform(const SpaceTimeGrid& grid, const std::vector<char>& seeds) {
  constexpr double big = 1e30;
  const std::size_t count = grid.node_count();
  std::vector<double> g(count);
  bool any = false;
  for (std::size_t f = 0; f < count; ++f) {
    g[f] = seeds[f] ? 0.0 : big;
    any = any || seeds[f];
  }
  if (!any) return std::vector<double>(count, kInf);
  std::vector<double> line, out;
  std::vector<int> v;
  std::vector<double> z;
  for (int a = 0; a < grid.dim(); ++a) {
    const int m = grid.nodes(a);
    const std::size_t stride = grid.stride(a);
    line.resize(m);
    for (std::size_t f = 0; f < count; ++f) {
      if (grid.unflat(f)[a] != 0) continue;
      for (int i = 0; i < m; ++i) line[i] = g[f + i * stride];
      squared_dt_1d(line, out, v, z);
      for (int i = 0; i < m; ++i) g[f + i * stride] = std::min(out[i], big);
    }
  }
  for (double& x : g) x = x >= 0.5 * big ? kInf : std::sqrt(x) * grid.h();
  return g;
}

CaloricDistanceMap::CaloricDistanceMap(const Field& field, double theta) : grid_(&field.grid()) {
  const SpaceTimeGrid& grid = *grid_;
  dist_.resize(grid.size());
  std::vector<char> unmasked(grid.node_count());
  for (int k = 0; k <= grid.last_level(); ++k) {
    const auto slice = field.slice(k);
    for (std::size_t f = 0; f < grid.node_count(); ++f) unmasked[f] = !(slice[at(f)] > theta);
    const std::vector<double> d = distance_transform(grid, unmasked);
    std::copy(d.begin(), d.end(), dist_.begin() + static_cast<std::ptrdiff_t>(k * grid.node_count()));
  }
}

double CaloricDistanceMap::operator()(const GridIndex& idx) const {
  const SpaceTimeGrid& grid = *grid_;
  const std::size_t f = grid.flat(idx.node);
  const std::size_t nc = grid.node_count();
  double d = std::min(dist_[static_cast<std::size_t>(idx.k) * nc + f], distance_cap(grid));
  if (d == 0.0) return 0.0;
  for (int step = 1;; ++step) {
    const double gap = std::sqrt(step * grid.dt());
    if (gap >= d) break;
    bool any = false;
    for (int k : {idx.k - step, idx.k + step}) {
      if (k < 0 || k > grid.last_level()) continue;
      any = true;
      d = std::min(d, std::max(gap, dist_[static_cast<std::size_t>(k) * nc + f]));
    }
    if (!any) break;
  }
  return d;
}

GrowthConstantReport u_vs_d2_check(const Field& field, double theta, const SubGrid& K) {
  const SpaceTimeGrid& grid = field.grid();
  const CaloricDistanceMap dmap(field, theta);
  GrowthConstantReport rep;
  const double h2 = grid.h() * grid.h();
  for (int k = K.k_lo; k <= K.k_hi; ++k) {
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
      const GridIndex idx{grid.unflat(f), k};
      if (!K.contains(idx)) continue;
      const double u = field(idx);
      if (!(u > theta)) continue;
      const double d = dmap(idx);
      const double c = u / (d * d + h2);
      ++rep.evaluated;
      if (c > rep.C0_hat) {
        rep.C0_hat = c;
        rep.witness = idx;
      }
    }
  }
  return rep;
}

PorosityReport porosity_estimate(const PositivitySet& fbset, const SpaceTimeGrid& grid,
                                 std::span<const double> radii) {
  PorosityReport rep;
  rep.k = fbset.k;
  rep.t0 = grid.time(fbset.k);
  rep.radii.assign(radii.begin(), radii.end());
  rep.fb_count = fbset.fb.size();
  rep.measure_proxy = rep.fb_count * std::pow(grid.h(), grid.dim());
  rep.delta_hat = kInf;
  std::vector<char> seeds(grid.node_count(), 0);
  for (std::size_t f : fbset.fb) seeds[f] = 1;
  const std::vector<double> dist = distance_transform(grid, seeds);

  for (std::size_t f : fbset.fb) {
    const NodeIndex node = grid.unflat(f);
    const Point x = grid.position(node);
    const double cap = grid.distance_to_lateral(node);
    std::vector<double> row;
    for (double r : radii) {
      if (r > cap * (1.0 + 1e-12)) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double best = 0.0;
      for_each_ball_node(grid, x, r, [&](const NodeIndex& y) {
        const double room = r - (grid.position(y) - x).norm();
        best = std::max(best, std::min(dist[grid.flat(y)], room) / r);
      });
      row.push_back(best);
      ++rep.evaluated;
      if (best < rep.delta_hat) {
        rep.delta_hat = best;
        rep.witness = node;
        rep.witness_radius = r;
      }
    }
    rep.points.push_back(node);
    rep.ratio.push_back(std::move(row));
  }
  if (rep.evaluated == 0) rep.delta_hat = 0.0;
  return rep;
}

namespace {

struct KPoint {
  GridIndex idx;
  Point x;
  double t;
  double u;
};

std::vector<KPoint> collect(const Field& field, const SubGrid& K) {
  const SpaceTimeGrid& grid = field.grid();
  std::vector<KPoint> pts;
  for (int k = K.k_lo; k <= K.k_hi; ++k)
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
      const GridIndex idx{grid.unflat(f), k};
      if (K.contains(idx)) pts.push_back({idx, grid.position(idx.node), grid.time(k), field(idx)});
    }
  return pts;
}

}  // namespace

LipEstimate lip_seminorm(const Field& field, const SubGrid& K, std::size_t sample_budget,
                         std::uint64_t seed) {
  const SpaceTimeGrid& grid = field.grid();
  const std::vector<KPoint> pts = collect(field, K);
  LipEstimate est;
  if (pts.size() < 2) return est;
  auto visit = [&](std::size_t i, std::size_t j) {
    if (i == j) return;
    const KPoint& a = pts[i];
    const KPoint& b = pts[j];
    const double den = (a.x - b.x).norm() + std::sqrt(std::abs(a.t - b.t));
    const double q = std::abs(a.u - b.u) / den;
    ++est.pairs;
    if (q > est.value) {
      est.value = q;
      est.a = a.idx;
      est.b = b.idx;
    }
  };
  const std::size_t m = pts.size();
  if (m <= sample_budget / m) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) visit(i, j);
    return est;
  }
  est.exact = false;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  for (std::size_t s = 0; s < sample_budget; ++s) visit(pick(rng), pick(rng));
  // Adjacent pairs: pts is ordered by level, then by flat node.
  const std::size_t per_level = K.spatial_count(grid.dim());
  std::vector<std::size_t> offset(grid.node_count(), m);
  for (std::size_t i = 0; i < per_level; ++i) offset[grid.flat(pts[i].idx.node)] = i;
  for (std::size_t i = 0; i < m; ++i) {
    const GridIndex& idx = pts[i].idx;
    const std::size_t base = i - offset[grid.flat(idx.node)];
    for (int a = 0; a < grid.dim(); ++a) {
      if (idx.node[a] >= K.hi[a]) continue;
      NodeIndex nb = idx.node;
      ++nb[a];
      visit(i, base + offset[grid.flat(nb)]);
    }
    if (idx.k < K.k_hi) visit(i, i + per_level);
  }
  return est;
}

TimeHolderReport time_holder_check(const Field& field, const SubGrid& K, double monotone_tol) {
  const SpaceTimeGrid& grid = field.grid();
  TimeHolderReport rep;
  rep.min_increment = kInf;
  std::vector<double> col;
  for (std::size_t f = 0; f < grid.node_count(); ++f) {
    const NodeIndex node = grid.unflat(f);
    if (!K.contains(GridIndex{node, K.k_lo})) continue;
    col.clear();
    for (int k = K.k_lo; k <= K.k_hi; ++k) col.push_back(field(GridIndex{node, k}));
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (i + 1 < col.size() && col[i + 1] - col[i] < rep.min_increment) {
        rep.min_increment = col[i + 1] - col[i];
        rep.min_witness = GridIndex{node, K.k_lo + static_cast<int>(i) + 1};
      }
      for (std::size_t j = i + 1; j < col.size(); ++j) {
        const double c = std::abs(col[j] - col[i]) / std::sqrt((j - i) * grid.dt());
        if (c > rep.C_hat) {
          rep.C_hat = c;
          rep.a = GridIndex{node, K.k_lo + static_cast<int>(i)};
          rep.b = GridIndex{node, K.k_lo + static_cast<int>(j)};
        }
      }
    }
  }
  if (rep.min_increment == kInf) rep.min_increment = 0.0;
  rep.monotone = rep.min_increment >= -monotone_tol;
  return rep;
}

GradientBands gradient_bands(const Field& field, std::span<const double> edges) {
  const SpaceTimeGrid& grid = field.grid();
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) || !(edges.front() > 0.0))
    throw GridError("gradient bands need at least two positive increasing edges");
  GradientBands out;
  out.edges.assign(edges.begin(), edges.end());
  out.maxima.assign(edges.size() - 1, 0.0);
  out.witnesses.resize(edges.size() - 1);
  const double inv2h = 0.5 / grid.h();
  for (int k = 1; k < grid.last_level(); ++k) {
    const double* u = field.slice(k).data();
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
      const NodeIndex node = grid.unflat(f);
      if (grid.on_spatial_boundary(node)) continue;
      const GridIndex idx{node, k};
      const double d = grid.parabolic_distance(idx);
      const auto it = std::upper_bound(edges.begin(), edges.end(), d);
      if (it == edges.begin() || it == edges.end()) continue;
      const std::size_t band = static_cast<std::size_t>(it - edges.begin()) - 1;
      double g2 = 0.0;
      for (int a = 0; a < grid.dim(); ++a) {
        const double g = (u[f + grid.stride(a)] - u[f - grid.stride(a)]) * inv2h;
        g2 += g * g;
      }
      const double g = std::sqrt(g2);
      if (g > out.maxima[band]) {
        out.maxima[band] = g;
        out.witnesses[band] = idx;
      }
    }
  }
  return out;
}

double fit_gradient_envelope(const GradientBands& bands) {
  double L = 0.0;
  for (std::size_t b = 0; b < bands.maxima.size(); ++b) {
    const double d = bands.edges[b];
    L = std::max(L, bands.maxima[b] / (1.0 + 1.0 / (d * d)));
  }
  return L;
}

GradientEnvelopeCheck gradient_bound_check(const GradientBands& bands, double L_bar, double factor) {
  GradientEnvelopeCheck out;
  for (std::size_t b = 0; b < bands.maxima.size(); ++b) {
    const double d = bands.edges[b];
    const double env = L_bar * (1.0 + 1.0 / (d * d));
    const double ratio = env > 0.0 ? bands.maxima[b] / env : (bands.maxima[b] > 0.0 ? kInf : 0.0);
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_band = static_cast<int>(b);
    }
  }
  out.passed = out.worst_ratio <= factor;
  return out;
}

}  // namespace npfb
