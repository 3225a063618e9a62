#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace gmtlab {

struct NelderMeadOptions {
  double initial_step = 0.25;
  int max_evaluations = 200;
  /// Stop when the spread of simplex values falls below ftol ...
  double ftol = 1e-6;
  /// ... and its diameter below xtol.
  double xtol = 1e-5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  /// Best value after every evaluation.
  std::vector<double> trace;
};

/// Derivative-free Nelder-Mead minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  double best = std::numeric_limits<double>::infinity();
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.evaluations;
    best = std::min(best, v);
    res.trace.push_back(best);
    return v;
  };
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.initial_step;
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](double t, std::vector<double>& out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + t * (pts[order[n]][k] - centroid[k]);
  };
  while (res.evaluations < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    double diam = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) diam = std::max(diam, std::abs(pts[order[i]][k] - pts[order[0]][k]));
    if (vals[order[n]] - vals[order[0]] <= opt.ftol && diam <= opt.xtol) break;
    if (diam <= 1e-3 * opt.xtol) break;
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[order[i]][k] / static_cast<double>(n);
    along(-1.0, trial);
    const double fr = eval(trial);
    if (fr < vals[order[0]]) {
      along(-2.0, trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[order[n]] = trial2;
        vals[order[n]] = fe;
      } else {
        pts[order[n]] = trial;
        vals[order[n]] = fr;
      }
      continue;
    }
    if (fr < vals[order[n - 1]]) {
      pts[order[n]] = trial;
      vals[order[n]] = fr;
      continue;
    }
    const bool outside = fr < vals[order[n]];
    along(outside ? -0.5 : 0.5, trial2);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : vals[order[n]])) {
      pts[order[n]] = trial2;
      vals[order[n]] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) pts[order[i]][k] = pts[order[0]][k] + 0.5 * (pts[order[i]][k] - pts[order[0]][k]);
      vals[order[i]] = eval(pts[order[i]]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  res.x = pts[static_cast<std::size_t>(it - vals.begin())];
  res.value = *it;
  return res;
}

/// Point on the unit sphere of R^(angles + 1) in hyperspherical coordinates.
inline std::vector<double> sphere_point(const std::vector<double>& angles) {
  std::vector<double> c(angles.size() + 1);
  double s = 1.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    c[i] = s * std::cos(angles[i]);
    s *= std::sin(angles[i]);
  }
  c.back() = s;
  return c;
}

/// Inverse of sphere_point for a nonzero vector.
inline std::vector<double> sphere_angles(const std::vector<double>& v) {
  const std::size_t m = v.size();
  std::vector<double> a(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    double tail = 0.0;
    for (std::size_t k = i + 1; k < m; ++k) tail += v[k] * v[k];
    tail = std::sqrt(tail);
    a[i] = std::atan2(tail, v[i]);
    if (i + 2 == m && v[m - 1] < 0.0) a[i] = -a[i];
  }
  return a;
}

}  // namespace gmtlab
