#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "npfb/expression.hpp"
#include "npfb/field.hpp"
#include "npfb/grid.hpp"

namespace npfb {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ZetaProfile { smooth_bump, triangular_mollified };

std::string to_string(ZetaProfile profile);
ZetaProfile parse_zeta_profile(const std::string& name);

/// zeta_eps(s) = (1/eps) zeta(s/eps) for a base bump zeta supported on [0,1].
struct ZetaFamily {
  double eps = 0.1;
  ZetaProfile profile = ZetaProfile::smooth_bump;

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  }
};

/// Base profile on [0,1]; sup = 1, zero outside (0,1).
///
/// smooth_bump: exp(1 - 1/(1 - (2r-1)^2)).
/// triangular_mollified: the hat function on [0,1] smoothed by a box of
/// width 1/3 (the quadratic B-spline), rescaled to unit height.
template <typename Scalar>
Scalar zeta_base(Scalar r, ZetaProfile profile) {
  using std::exp;
  if (!(r > Scalar(0)) || !(r < Scalar(1))) return Scalar(0);
  if (profile == ZetaProfile::smooth_bump) {
    const Scalar y = Scalar(2) * r - Scalar(1);
    const Scalar q = Scalar(1) - y * y;
    return exp(Scalar(1) - Scalar(1) / q);
  }
  const Scalar s = Scalar(3) * r;
  Scalar b;
  if (s < Scalar(1)) b = s * s / Scalar(2);
  else if (s < Scalar(2)) b = (-Scalar(2) * s * s + Scalar(6) * s - Scalar(3)) / Scalar(2);
  else b = (Scalar(3) - s) * (Scalar(3) - s) / Scalar(2);
  return b / Scalar(0.75);
}

template <typename Scalar>
Scalar zeta_eps(Scalar s, const ZetaFamily& fam) {
  fam.validate();
  const Scalar eps = static_cast<Scalar>(fam.eps);
  return zeta_base(s / eps, fam.profile) / eps;
}

/// sup |zeta'| of the base profile.
double zeta_derivative_bound(ZetaProfile profile);

/// Integral of the base profile over [0,1].
double zeta_mass(ZetaProfile profile);

/// Forcing f(x,t) with its advertised bounds.
struct ForcingSpec {
  double c0 = 1.0;
  double c1 = 1.0;
  Expression form = Expression::constant(1.0);
  double grad_bound = 0.0;
};

/// Dirichlet data phi(x,t) = form(x,t) * ramp(t) on the parabolic boundary.
struct BoundaryDataSpec {
  Expression form = Expression::constant(0.0);
  Expression ramp = Expression::constant(1.0);

  double operator()(const Point& x, double t) const { return form(x, t) * ramp(x, t); }
};

struct HypothesisCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;  ///< most violating value found (or the extreme value)
  GridIndex witness;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;

  bool all_passed() const;
  const HypothesisCheck& find(const std::string& name) const;
};

/// Samples f and phi on the grid and checks positivity bounds, the forcing
/// gradient bound, time monotonicity and phi(.,0) = 0.
HypothesisReport validate_hypotheses(const ForcingSpec& f, const BoundaryDataSpec& phi,
                                     const SpaceTimeGrid& grid);

Field sample_field(const ForcingSpec& f, const SpaceTimeGrid& grid);
Field sample_field(const BoundaryDataSpec& phi, const SpaceTimeGrid& grid);

}  // namespace npfb
