#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "npfb/fb_analysis.hpp"

using namespace npfb;

namespace {

// u = (x1 - 1/2)_+^q, time independent.
Field half_plane(int cells, double q, double dt = 0.25, double T = 1.0) {
  const SpaceTimeGrid g = SpaceTimeGrid::cube(2, cells, dt, T);
  return tabulate(g, [q](const Point& x, double) { return std::pow(std::max(0.0, x[0] - 0.5), q); });
}

SubGrid whole(const SpaceTimeGrid& g) {
  return SubGrid{{0, 0, 0}, {g.cells(0), g.cells(1), 0}, 0, g.last_level()};
}

}  // namespace

TEST_SUITE("fb_analysis") {
  TEST_CASE("threshold, radii and mu0") {
    CHECK(fb_threshold(0.5, 4.0) == 1.0);
    const auto r = dyadic_radii(1.0 / 64, 0.5);
    REQUIRE(r.size() == 4);
    CHECK(r.front() == doctest::Approx(1.0 / 16));
    CHECK(r.back() == doctest::Approx(0.5));
    CHECK(dyadic_radii(0.25, 0.5).empty());
    CHECK(mu0(1.0, 2.0, 2) == doctest::Approx(0.25));
    CHECK(mu0(1.0, 10.0, 1) == doctest::Approx(10.0 / 36.0));
    CHECK(mu0(1.0, 1.5, 3) == doctest::Approx(0.15));
    CHECK(mu0(2.0, 1.2, 1) == doctest::Approx(1.0));
  }

  TEST_CASE("extract_positivity") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 16, 0.25, 1.0);
    CHECK(extract_positivity(tabulate(g, [](const Point&, double) { return 0.0; }), 1, 1e-9).empty());
    const PositivitySet all = extract_positivity(tabulate(g, [](const Point&, double) { return 1.0; }), 1, 1e-9);
    CHECK(all.empty());
    CHECK(std::count(all.mask.begin(), all.mask.end(), 1) == 17 * 17);
    const PositivitySet ramp = extract_positivity(half_plane(16, 1.0), 2, 1e-9);
    REQUIRE(ramp.fb.size() == 17);
    for (std::size_t f : ramp.fb) CHECK(g.unflat(f)[0] == 9);
    CHECK(std::is_sorted(ramp.fb.begin(), ramp.fb.end()));
    CHECK_THROWS_AS(extract_positivity(half_plane(16, 1.0), 5, 0.0), GridError);
  }

  TEST_CASE("sup_cylinder") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 32, 1.0 / 64, 0.5);
    Point z(2);
    z << 0.5, 0.5;
    CHECK(sup_cylinder(tabulate(g, [](const Point&, double) { return 0.7; }), z, 0.4, 0.125) == 0.7);
    // Increasing in t: the sup sits on the top slice, the last level at or below s.
    CHECK(sup_cylinder(tabulate(g, [](const Point&, double t) { return t; }), z, 0.375, 0.125) == doctest::Approx(0.375));
    CHECK(sup_cylinder(tabulate(g, [](const Point&, double t) { return t; }), z, 0.38, 0.125) == doctest::Approx(0.375));
    const Field quad = tabulate(g, [&z](const Point& x, double) { return (x - z).squaredNorm(); });
    const double h = g.h();
    // Largest i^2 + j^2 below 16 is 13.
    CHECK(sup_cylinder(quad, z, 0.4, 4.0 * h) == doctest::Approx(13.0 * h * h));
    CHECK_THROWS_AS(sup_cylinder(quad, z, 0.01, 0.125), GridError);
    z << 0.05, 0.5;
    CHECK_THROWS_AS(sup_cylinder(quad, z, 0.4, 0.125), GridError);
  }

  TEST_CASE("doubling set of a quadratic and of zero") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 64, 1.0 / 64, 1.0);
    Point z(2);
    z << 0.5, 0.5;
    const Field quad = tabulate(g, [&z](const Point& x, double) { return (x - z).squaredNorm(); });
    const DoublingReport r = doubling_set(quad, z, 1.0, 0.25, 0.25, 1);
    CHECK(r.M == 16.0);
    // Largest i^2 + j^2 below 256, 64, 16: 250, 61, 13.
    REQUIRE(r.S.size() == 3);
    CHECK(r.S[0] == 1.0);
    CHECK(r.S[1] == doctest::Approx(61.0 / 250));
    CHECK(r.S[2] == doctest::Approx(13.0 / 250));
    CHECK(r.H == std::vector<int>{0, 1});
    CHECK(r.chain_length == 1);
    CHECK(r.C1 == doctest::Approx(61.0 / 250));
    CHECK_FALSE(r.truncated);

    const DoublingReport deep = doubling_set(quad, z, 1.0, 0.25, 0.25, 6);
    CHECK(deep.truncated);
    CHECK(deep.S.size() == 3);

    const DoublingReport zero = doubling_set(tabulate(g, [](const Point&, double) { return 0.0; }), z, 1.0, 0.25, 0.25, 1);
    CHECK(zero.H.size() == 2);
    CHECK(zero.C1 == 0.0);
    CHECK(zero.chain_holds);
  }

  TEST_CASE("nondegeneracy on a quadratic half plane") {
    const Field u = half_plane(32, 2.0);
    const SpaceTimeGrid& g = u.grid();
    const PositivitySet fb = extract_positivity(u, g.last_level(), 1e-12);
    const auto radii = dyadic_radii(g.h(), 0.5);
    const NondegeneracyReport r = nondegeneracy_check(u, fb, 1.0, 2.0, 2, radii);
    CHECK(r.mu0 == doctest::Approx(0.25));
    REQUIRE_FALSE(r.entries.empty());
    CHECK(r.pass_fraction == 1.0);
    CHECK(r.min_margin >= 0.0);
    CHECK(r.skipped_centers > 0);  // nodes near x2 = 0 have no admissible radius
    for (const auto& e : r.entries) CHECK(e.r <= 0.5 * g.parabolic_distance(e.center) + 1e-12);
  }

  TEST_CASE("nondegeneracy fails at a flat center") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 32, 0.25, 1.0);
    const Field zero = tabulate(g, [](const Point&, double) { return 0.0; });
    PositivitySet fb;
    fb.k = g.last_level();
    fb.fb = {g.flat(NodeIndex{16, 16, 0})};
    const auto radii = dyadic_radii(g.h(), 0.5);
    const NondegeneracyReport r = nondegeneracy_check(zero, fb, 1.0, 2.0, 2, radii);
    REQUIRE(r.entries.size() == 2);
    CHECK(r.pass_fraction == 0.0);
    CHECK(r.min_margin == doctest::Approx(-0.25 * 0.25 * 0.25));
  }

  TEST_CASE("growth slope of an exact quadratic") {
    const Field u = half_plane(64, 2.0);
    const PositivitySet fb = extract_positivity(u, 1, 1e-12);
    const std::vector<double> radii{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
    const GrowthStats st = growth_upper_check(u, fb, radii);
    REQUIRE_FALSE(st.empty);
    CHECK(st.slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(st.min_slope == doctest::Approx(2.0));
    CHECK(st.d0_hat == doctest::Approx(1.0));
    CHECK(st.D0_hat == doctest::Approx(1.0));
    for (const auto& c : st.centers) CHECK(c.r.front() >= 4.0 / 64 - 1e-12);

    const Field v = tabulate(u.grid(), [&](const Point& x, double) { return 3.0 * std::pow(std::max(0.0, x[0] - 0.5), 2.0); });
    const GrowthStats sv = growth_upper_check(v, extract_positivity(v, 1, 1e-12), radii);
    CHECK(sv.slope == doctest::Approx(2.0));
    CHECK(sv.d0_hat == doctest::Approx(3.0));

    const Field w = half_plane(64, 1.0);
    CHECK(growth_upper_check(w, extract_positivity(w, 1, 1e-12), radii).slope == doctest::Approx(1.0));
  }

  TEST_CASE("loglog slope") {
    const std::vector<double> x{1, 2, 4, 8}, y{3, 24, 192, 1536};
    CHECK(loglog_slope(x, y) == doctest::Approx(3.0));
    CHECK(std::isnan(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0})));
  }

  TEST_CASE("distance transform against brute force") {
    std::array<int, kMaxDim> cells{7, 5, 6};
    const SpaceTimeGrid g(3, 0.1, 0.5, cells, Point::Zero(3), 1.0);
    std::mt19937_64 rng(5);
    std::bernoulli_distribution seed(0.03);
    std::vector<char> seeds(g.node_count());
    for (auto& s : seeds) s = seed(rng);
    seeds[17] = 1;
    const auto d = distance_transform(g, seeds);
    for (std::size_t f = 0; f < g.node_count(); ++f) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < g.node_count(); ++s)
        if (seeds[s]) best = std::min(best, (g.position(g.unflat(f)) - g.position(g.unflat(s))).norm());
      CHECK(d[f] == doctest::Approx(best).epsilon(1e-12));
    }
    CHECK(std::isinf(distance_transform(g, std::vector<char>(g.node_count(), 0))[3]));
  }

  TEST_CASE("caloric distance") {
    const Field u = half_plane(32, 1.0, 1.0 / 64, 0.5);
    const SpaceTimeGrid& g = u.grid();
    const double h = g.h();
    CHECK(caloric_distance(u, 1e-12, GridIndex{{10, 16, 0}, 5}) == 0.0);
    // Time independent mask: the distance is the spatial distance to x1 = 1/2.
    const double d = caloric_distance(u, 1e-12, GridIndex{{22, 16, 0}, 16});
    CHECK(d <= 6.0 * h + 1e-12);
    CHECK(d >= 5.5 * h - 1e-12);
    const CaloricDistanceMap map(u, 1e-12);
    CHECK(map(GridIndex{{22, 16, 0}, 16}) == doctest::Approx(6.0 * h));
    CHECK(map(GridIndex{{10, 16, 0}, 16}) == 0.0);
  }

  TEST_CASE("caloric distance map agrees with bisection on a moving mask") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 24, 1.0 / 256, 0.25);
    const Field u = tabulate(g, [](const Point& x, double t) { return std::max(0.0, x[0] - 0.3 - t) + 0.0 * x[1]; });
    const CaloricDistanceMap map(u, 1e-12);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> I(0, 24), K(0, g.last_level());
    for (int i = 0; i < 60; ++i) {
      const GridIndex idx{{I(rng), I(rng), 0}, K(rng)};
      const double b = caloric_distance(u, 1e-12, idx);
      CHECK(map(idx) >= b - 1e-12);
      CHECK(map(idx) <= b + 0.5 * g.h() + 1e-12);
    }
    // 1-Lipschitz in space on every slice.
    for (int k : {0, 32, g.last_level()})
      for (int i = 0; i < 24; ++i)
        for (int j = 0; j <= 24; ++j)
          CHECK(std::abs(map(GridIndex{{i + 1, j, 0}, k}) - map(GridIndex{{i, j, 0}, k})) <= g.h() * (1 + 1e-12));
  }

  TEST_CASE("u_vs_d2") {
    const Field zero = tabulate(SpaceTimeGrid::cube(2, 16, 0.25, 1.0), [](const Point&, double) { return 0.0; });
    const GrowthConstantReport z = u_vs_d2_check(zero, 1e-12, SubGrid::interior_box(zero.grid(), 0.125, 0, 4));
    CHECK(z.C0_hat == 0.0);
    CHECK(z.evaluated == 0);

    // A linear ramp is not quadratic: C0_hat = 1/(2h) doubles under refinement.
    double prev = 0.0;
    for (int cells : {32, 64}) {
      const Field u = half_plane(cells, 1.0);
      const GrowthConstantReport r = u_vs_d2_check(u, 1e-12, SubGrid::interior_box(u.grid(), 0.125, 1, 4));
      CHECK(r.C0_hat == doctest::Approx(cells / 2.0));
      if (prev > 0.0) CHECK(r.C0_hat / prev == doctest::Approx(2.0));
      prev = r.C0_hat;
    }
    const Field q = half_plane(64, 2.0);
    CHECK(u_vs_d2_check(q, 1e-12, SubGrid::interior_box(q.grid(), 0.125, 1, 4)).C0_hat < 1.0);
  }

  TEST_CASE("porosity of simple sets") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 32, 0.25, 1.0);
    const std::vector<double> radii{0.125, 0.25};
    PositivitySet point;
    point.fb = {g.flat(NodeIndex{16, 16, 0})};
    CHECK(porosity_estimate(point, g, radii).delta_hat == doctest::Approx(0.5));

    PositivitySet full;
    for (std::size_t f = 0; f < g.node_count(); ++f) full.fb.push_back(f);
    CHECK(porosity_estimate(full, g, radii).delta_hat == 0.0);

    PositivitySet plane;
    for (int j = 0; j <= 32; ++j) plane.fb.push_back(g.flat(NodeIndex{16, j, 0}));
    const PorosityReport pr = porosity_estimate(plane, g, radii);
    CHECK(pr.delta_hat == doctest::Approx(0.5));
    CHECK(pr.fb_count == 33);
    CHECK(pr.measure_proxy == doctest::Approx(33.0 / 1024));
    CHECK(std::isnan(pr.ratio.front().front()));  // node on the lateral boundary
  }

  TEST_CASE("porosity ratios against brute force") {
    const int N = 25;
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, N - 1, 0.25, 1.0);
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> I(0, N - 1);
    PositivitySet fb;
    std::vector<std::pair<int, int>> pts;
    for (int s = 0; s < 12; ++s) {
      const int i = I(rng), j = I(rng);
      fb.fb.push_back(g.flat(NodeIndex{i, j, 0}));
    }
    std::sort(fb.fb.begin(), fb.fb.end());
    fb.fb.erase(std::unique(fb.fb.begin(), fb.fb.end()), fb.fb.end());
    for (std::size_t f : fb.fb) pts.emplace_back(g.unflat(f)[0], g.unflat(f)[1]);
    const std::vector<double> radii{4.0 * g.h(), 8.0 * g.h()};
    const PorosityReport r = porosity_estimate(fb, g, radii);
    for (std::size_t p = 0; p < pts.size(); ++p)
      for (std::size_t q = 0; q < radii.size(); ++q) {
        if (std::isnan(r.ratio[p][q])) continue;
        CHECK(r.ratio[p][q] == doctest::Approx(oracle::porosity_ratio_2d(pts, N, g.h(), pts[p].first, pts[p].second, radii[q])));
      }
  }

  TEST_CASE("Lip seminorm") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 8, 1.0 / 16, 0.5);
    CHECK(lip_seminorm(tabulate(g, [](const Point&, double) { return 2.0; }), whole(g), 1u << 20, 0).value == 0.0);
    const LipEstimate x1 = lip_seminorm(tabulate(g, [](const Point& x, double) { return x[0]; }), whole(g), 1u << 20, 0);
    CHECK(x1.exact);
    CHECK(x1.value == doctest::Approx(1.0));
    CHECK(lip_seminorm(tabulate(g, [](const Point&, double t) { return std::sqrt(t); }), whole(g), 1u << 20, 0).value ==
          doctest::Approx(1.0));
    double prev = 0.0;
    for (double dt : {1.0 / 16, 1.0 / 256}) {
      const SpaceTimeGrid gt = SpaceTimeGrid::cube(2, 4, dt, 0.5);
      const double v = lip_seminorm(tabulate(gt, [](const Point&, double t) { return std::pow(t, 0.25); }), whole(gt), 1u << 22, 0).value;
      CHECK(v == doctest::Approx(std::pow(dt, -0.25)));
      CHECK(v > prev);
      prev = v;
    }
  }

  TEST_CASE("Lip seminorm sampling finds the adjacent-pair maximum") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 16, 1.0 / 64, 0.25);
    const Field u = tabulate(g, [](const Point& x, double t) { return 0.5 * x[0] + 0.1 * t; });
    const LipEstimate e = lip_seminorm(u, whole(g), 1000, 3);
    CHECK_FALSE(e.exact);
    CHECK(e.value == doctest::Approx(0.5));
  }

  TEST_CASE("time Holder check") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 8, 1.0 / 64, 0.5);
    const TimeHolderReport c = time_holder_check(tabulate(g, [](const Point&, double) { return 1.0; }), whole(g));
    CHECK(c.C_hat == 0.0);
    CHECK(c.monotone);
    const TimeHolderReport s = time_holder_check(tabulate(g, [](const Point&, double t) { return std::min(std::sqrt(t), 0.6); }), whole(g));
    CHECK(s.C_hat == doctest::Approx(1.0));
    CHECK(s.monotone);
    CHECK(s.min_increment == 0.0);
    const TimeHolderReport d = time_holder_check(tabulate(g, [](const Point&, double t) { return 1.0 - t; }), whole(g));
    CHECK_FALSE(d.monotone);
    CHECK(d.min_increment == doctest::Approx(-1.0 / 64));
  }

  TEST_CASE("gradient bands of an affine field") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 32, 1.0 / 256, 0.25);
    const Field u = tabulate(g, [](const Point& x, double) { return 3.0 * x[0] + 4.0 * x[1]; });
    const std::vector<double> edges{2 * g.h(), 4 * g.h(), 8 * g.h(), 0.5};
    const GradientBands b = gradient_bands(u, edges);
    REQUIRE(b.maxima.size() == 3);
    for (double m : b.maxima) CHECK(m == doctest::Approx(5.0));
    const double L = fit_gradient_envelope(b);
    CHECK(L == doctest::Approx(5.0 / (1.0 + 1.0 / (edges[2] * edges[2]))));
    const GradientEnvelopeCheck chk = gradient_bound_check(b, L);
    CHECK(chk.passed);
    CHECK(chk.worst_ratio == doctest::Approx(1.0));
    CHECK(chk.worst_band == 2);
    CHECK_FALSE(gradient_bound_check(b, 0.1 * L).passed);
    CHECK_THROWS_AS(gradient_bands(u, std::vector<double>{0.1}), GridError);
    CHECK_THROWS_AS(gradient_bands(u, std::vector<double>{0.2, 0.1}), GridError);
  }
}
