#include <doctest.h>

#include <random>

#include "npfb/perturbation.hpp"

using namespace npfb;

namespace {

BoundaryDataSpec phi_of(const char* form, const char* ramp = "1") {
  return BoundaryDataSpec{Expression::parse(form, 2), Expression::parse(ramp, 2)};
}

}  // namespace

TEST_SUITE("perturbation") {
  TEST_CASE("zeta examples") {
    for (double eps : {0.2, 0.1, 0.05}) {
      CHECK(zeta_eps(-1.0, ZetaFamily{eps}) == 0.0);
      CHECK(zeta_eps(2.0 * eps, ZetaFamily{eps}) == 0.0);
      CHECK(zeta_eps(0.0, ZetaFamily{eps}) == 0.0);
      CHECK(zeta_eps(eps, ZetaFamily{eps}) == 0.0);
    }
    CHECK(zeta_eps(0.05, ZetaFamily{0.1}) == doctest::Approx(10.0));
    CHECK(zeta_eps(0.05, ZetaFamily{0.1, ZetaProfile::triangular_mollified}) == doctest::Approx(10.0));
    CHECK_THROWS_AS(zeta_eps(0.05, ZetaFamily{0.0}), ConfigError);
  }

  TEST_CASE("zeta envelope on random samples") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-0.1, 0.3);
    for (ZetaProfile prof : {ZetaProfile::smooth_bump, ZetaProfile::triangular_mollified})
      for (double eps : {0.2, 0.1, 0.05})
        for (int i = 0; i < 1000; ++i) {
          const double s = U(rng);
          const double z = zeta_eps(s, ZetaFamily{eps, prof});
          const double cap = (s > 0.0 && s < eps) ? 1.0 / eps : 0.0;
          CHECK(z >= 0.0);
          CHECK(z <= cap);
        }
  }

  TEST_CASE("profile mass and derivative bound against quadrature") {
    for (ZetaProfile prof : {ZetaProfile::smooth_bump, ZetaProfile::triangular_mollified}) {
      const int m = 200000;
      double mass = 0.0, slope = 0.0, prev = 0.0;
      for (int i = 1; i <= m; ++i) {
        const double r = static_cast<double>(i) / m;
        const double z = zeta_base(r, prof);
        mass += 0.5 * (z + prev) / m;
        slope = std::max(slope, std::abs(z - prev) * m);
        prev = z;
      }
      CHECK(zeta_mass(prof) == doctest::Approx(mass).epsilon(1e-6));
      CHECK(zeta_derivative_bound(prof) >= slope * (1.0 - 1e-4));
      CHECK(zeta_derivative_bound(prof) <= slope * 1.03);
    }
  }

  TEST_CASE("profile names") {
    CHECK(parse_zeta_profile("smooth-bump") == ZetaProfile::smooth_bump);
    CHECK(to_string(ZetaProfile::triangular_mollified) == "triangular-mollified");
    CHECK_THROWS_AS(parse_zeta_profile("gauss"), ConfigError);
  }

  TEST_CASE("constant forcing with a ramp passes every hypothesis") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 8, 0.05, 0.5);
    const HypothesisReport r = validate_hypotheses(ForcingSpec{}, phi_of("x1", "t"), g);
    CHECK(r.all_passed());
    CHECK(r.checks.size() == 7);
  }

  TEST_CASE("forcing increasing in t fails with a witness") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 8, 0.05, 0.5);
    const ForcingSpec f{1.0, 2.0, Expression::parse("1 + t", 2), 0.0};
    const HypothesisReport r = validate_hypotheses(f, phi_of("0"), g);
    CHECK_FALSE(r.all_passed());
    const HypothesisCheck& c = r.find("f non-increasing in t");
    CHECK_FALSE(c.passed);
    CHECK(c.witness.k >= 1);
    CHECK(c.worst == doctest::Approx(0.05));
  }

  TEST_CASE("nonzero initial data fails phi(x,0)=0") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 8, 0.05, 0.5);
    const HypothesisReport r = validate_hypotheses(ForcingSpec{}, phi_of("0.5*max(0, x1 - 0.5)*2"), g);
    const HypothesisCheck& c = r.find("phi(x,0)=0");
    CHECK_FALSE(c.passed);
    CHECK(c.worst == doctest::Approx(0.5));
    CHECK(c.witness.k == 0);
  }

  TEST_CASE("gradient and bound hypotheses") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 8, 0.05, 0.5);
    const ForcingSpec steep{1.0, 2.0, Expression::parse("1 + x1", 2), 0.5};
    CHECK_FALSE(validate_hypotheses(steep, phi_of("0"), g).find("E2 gradient bound |grad f| <= C").passed);
    const ForcingSpec ok{1.0, 2.0, Expression::parse("1 + x1", 2), 1.0};
    CHECK(validate_hypotheses(ok, phi_of("0"), g).all_passed());
    const ForcingSpec low{1.5, 2.0, Expression::parse("1 + x1", 2), 1.0};
    CHECK_FALSE(validate_hypotheses(low, phi_of("0"), g).find("E1 lower bound f >= c0 > 0").passed);
    CHECK_FALSE(validate_hypotheses(ForcingSpec{}, phi_of("1 - t"), g).find("phi non-decreasing in t").passed);
  }

  TEST_CASE("sample_field") {
    const SpaceTimeGrid g = SpaceTimeGrid::cube(2, 8, 0.05, 0.5);
    const Field f = sample_field(ForcingSpec{2.0, 2.0, Expression::constant(2.0), 0.0}, g);
    CHECK((f.values() == 2.0).all());
    const Field p = sample_field(phi_of("1", "min(t, 0.2)"), g);
    CHECK(p(GridIndex{{0, 3, 0}, 2}) == doctest::Approx(0.1));
    CHECK(p(GridIndex{{0, 3, 0}, 8}) == doctest::Approx(0.2));
    const Field q = sample_field(phi_of("x1*x2", "min(t, 0.2)"), g);
    CHECK((q.values() == sample_field(phi_of("x1*x2", "min(t, 0.2)"), g).values()).all());
  }
}
