#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace cyclofrag {

struct SimplexResult {
  std::vector<double> x;
  double fmin{};
  bool converged{};
  int iterations{};
};

// Derivative-free Nelder-Mead with the standard reflection/expansion/
// contraction/shrink coefficients. Converges when both the function-value
// spread and the vertex spread of the simplex fall below `tol`.
template <typename F>
SimplexResult minimize_simplex(F&& f, std::span<const double> x0, double step = 0.05,
                               double tol = 1e-10, int max_iter = 10000) {
  const std::size_t n = x0.size();
  const std::size_t m = n + 1;

  std::vector<std::vector<double>> verts(m, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < n; ++i) verts[i + 1][i] += step;
  std::vector<double> fv(m);
  for (std::size_t i = 0; i < m; ++i) fv[i] = f(std::span<const double>(verts[i]));

  std::vector<std::size_t> order(m);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  int iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[m - 1];
    const std::size_t second_worst = order[m - 2];

    double vertex_spread = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        vertex_spread = std::max(vertex_spread, std::fabs(verts[i][j] - verts[best][j]));
    if (std::fabs(fv[worst] - fv[best]) < tol && vertex_spread < tol) {
      converged = true;
      break;
    }

    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (i != worst) s += verts[i][j];
      centroid[j] = s / static_cast<double>(n);
    }

    for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + (centroid[j] - verts[worst][j]);
    const double fr = f(std::span<const double>(xr));

    if (fr < fv[best]) {
      for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - verts[worst][j]);
      const double fe = f(std::span<const double>(xe));
      if (fe < fr) {
        verts[worst] = xe;
        fv[worst] = fe;
      } else {
        verts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second_worst]) {
      verts[worst] = xr;
      fv[worst] = fr;
      continue;
    }

    if (fr < fv[worst]) {
      for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + 0.5 * (xr[j] - centroid[j]);
    } else {
      for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + 0.5 * (verts[worst][j] - centroid[j]);
    }
    const double fc = f(std::span<const double>(xc));
    if (fc < std::min(fr, fv[worst])) {
      verts[worst] = xc;
      fv[worst] = fc;
      continue;
    }

    for (std::size_t i = 0; i < m; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j)
        verts[i][j] = verts[best][j] + 0.5 * (verts[i][j] - verts[best][j]);
      fv[i] = f(std::span<const double>(verts[i]));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (fv[i] < fv[best]) best = i;
  return SimplexResult{verts[best], fv[best], converged, iter};
}

}  // namespace cyclofrag
