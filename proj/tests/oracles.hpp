// Reference computations written independently of the library internals.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Smooth bump exp(1 - 1/(1 - (2r-1)^2)) on (0,1), scaled to eps.
inline double zeta(double s, double eps) {
  const double r = s / eps;
  if (r <= 0.0 || r >= 1.0) return 0.0;
  const double y = 2.0 * r - 1.0;
  return std::exp(1.0 - 1.0 / (1.0 - y * y)) / eps;
}

/// Clamped explicit heat solver on [x0, x0 + m h]^2 with diffusivity 1/2:
/// u <- max(0, u + dt (0.5 lap u - zeta(u) - f)), boundary phi(x, t + dt).
/// Returns slices every `substeps` steps, row-major with x2 fastest.
struct HeatRun {
  std::vector<std::vector<double>> slices;
};

inline HeatRun heat2d(int m, double h, double x0, double dt, int substeps, int levels, double eps,
                      const std::function<double(double, double)>& f,
                      const std::function<double(double, double, double)>& phi) {
  const int N = m + 1;
  auto at = [N](int i, int j) { return static_cast<std::size_t>(i) * N + j; };
  std::vector<double> u(static_cast<std::size_t>(N) * N), next(u.size());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) u[at(i, j)] = phi(x0 + i * h, x0 + j * h, 0.0);
  HeatRun run;
  run.slices.push_back(u);
  long step = 0;
  for (int k = 0; k < levels; ++k) {
    for (int s = 0; s < substeps; ++s, ++step) {
      const double t = (k * substeps + s) * dt;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          const double x = x0 + i * h, y = x0 + j * h;
          if (i == 0 || j == 0 || i == m || j == m) {
            next[at(i, j)] = phi(x, y, t + dt);
            continue;
          }
          const double c = u[at(i, j)];
          const double lap = (u[at(i + 1, j)] + u[at(i - 1, j)] + u[at(i, j + 1)] + u[at(i, j - 1)] - 4.0 * c) / (h * h);
          next[at(i, j)] = std::max(0.0, c + dt * (0.5 * lap - zeta(c, eps) - f(x, y)));
        }
      u.swap(next);
    }
    run.slices.push_back(u);
  }
  return run;
}

/// Brute-force porosity ratio: max over grid y in B_r(x) of
/// min(min_z |y - z| over FB nodes z, r - |y - x|) / r, on a 2D unit-spaced lattice of size N.
inline double porosity_ratio_2d(const std::vector<std::pair<int, int>>& fb, int N, double h, int xi, int xj, double r) {
  double best = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double dy = std::hypot((i - xi) * h, (j - xj) * h);
      if (!(dy * dy < r * r * (1.0 - 1e-10))) continue;
      double dfb = std::numeric_limits<double>::infinity();
      for (auto [a, b] : fb) dfb = std::min(dfb, std::hypot((i - a) * h, (j - b) * h));
      best = std::max(best, std::min(dfb, r - dy) / r);
    }
  return best;
}

}  // namespace oracle
