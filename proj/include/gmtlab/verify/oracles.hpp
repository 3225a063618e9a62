#pragma once

// Independent reference computations used by the test suites and by the
// `verify` subcommand. Nothing here calls the LP, optimizer or sampler code
// paths it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "gmtlab/error.hpp"
#include "gmtlab/measure.hpp"
#include "gmtlab/weights.hpp"

namespace gmtlab::oracle {

/// Exact F_B(mu, sigma) for a handful of atoms by vertex enumeration of the
/// LP over node values: maximize sum d_i f_i subject to
/// |f_i - f_j| <= |x_i - x_j| and |f_i| <= (r - |x_i - c|)_+.
/// The feasible set is a bounded polytope, so some vertex is optimal.
/// Cost grows like C(n^2 + n, n); intended for n <= 6.
inline double brute_force_f_ball(const DiscreteMeasure& mu, const DiscreteMeasure& sigma, const Ball& b) {
  std::vector<Point> xs;
  std::vector<double> d;
  for (const auto& a : mu.atoms()) {
    xs.push_back(a.x);
    d.push_back(a.w);
  }
  for (const auto& a : sigma.atoms()) {
    xs.push_back(a.x);
    d.push_back(-a.w);
  }
  const int n = static_cast<int>(xs.size());
  if (n == 0) return 0.0;
  require(n <= 6, "brute_force_f_ball: at most 6 atoms");

  // Rows g . f <= h.
  std::vector<Eigen::VectorXd> g;
  std::vector<double> h;
  for (int i = 0; i < n; ++i) {
    const double cap = std::max(0.0, b.radius - distance(xs[i], b.center));
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row(i) = s;
      g.push_back(row);
      h.push_back(cap);
    }
    for (int j = i + 1; j < n; ++j)
      for (double s : {1.0, -1.0}) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
        row(i) = s;
        row(j) = -s;
        g.push_back(row);
        h.push_back(distance(xs[i], xs[j]));
      }
  }
  const int m = static_cast<int>(g.size());
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  Eigen::MatrixXd sys(n, n);
  Eigen::VectorXd rhs(n);
  for (;;) {
    for (int r = 0; r < n; ++r) {
      sys.row(r) = g[pick[r]].transpose();
      rhs(r) = h[pick[r]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.rank() == n) {
      const Eigen::VectorXd f = lu.solve(rhs);
      bool feasible = true;
      for (int k = 0; k < m && feasible; ++k) feasible = g[k].dot(f) <= h[k] + 1e-12;
      if (feasible) {
        double val = 0.0;
        for (int i = 0; i < n; ++i) val += d[i] * f(i);
        best = std::max(best, val);
      }
    }
    int k = n - 1;
    while (k >= 0 && pick[k] == m - n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int r = k + 1; r < n; ++r) pick[r] = pick[r - 1] + 1;
  }
  return best;
}

/// Uniform line measure of density `density` on {t u : |t| < half_length}
/// with `n` equal atoms at cell midpoints.
inline DiscreteMeasure line_measure(int dim, const Point& direction, double half_length, double density, int n) {
  std::vector<Atom> atoms;
  const double u = norm(direction);
  const double h = 2.0 * half_length / n;
  for (int i = 0; i < n; ++i) {
    const double t = -half_length + (i + 0.5) * h;
    atoms.push_back({(t / u) * direction, density * h});
  }
  return DiscreteMeasure(dim, std::move(atoms));
}

/// Harmonic measure of {(t, 0) : |t| <= a} in the upper half plane seen from (0, y).
inline double half_plane_interval(double a, double y) { return 2.0 / std::numbers::pi * std::atan(a / y); }

/// Harmonic measure of [lo, hi] x {0} from the pole (px, py), py > 0.
inline double half_plane_segment(double lo, double hi, double px, double py) {
  return (std::atan((hi - px) / py) - std::atan((lo - px) / py)) / std::numbers::pi;
}

/// sup nu(F)/nu(B) over fractional selections with mu(F) <= delta mu(B), by
/// enumerating LP vertices: a set S taken whole plus at most one partial cell.
inline double hru_fractional_enumeration(const WeightPanel& p, double delta) {
  const std::size_t n = p.cells.size();
  require(n <= 16, "hru_fractional_enumeration: at most 16 cells");
  double m = 0.0, nu = 0.0;
  for (const auto& c : p.cells) {
    m += c.mu_mass;
    nu += c.nu_mass;
  }
  const double budget = delta * m;
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double mm = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) {
        mm += p.cells[i].mu_mass;
        vv += p.cells[i].nu_mass;
      }
    if (mm > budget) continue;
    best = std::max(best, vv);
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1 || p.cells[j].mu_mass == 0.0) continue;
      const double t = std::min(1.0, (budget - mm) / p.cells[j].mu_mass);
      best = std::max(best, vv + t * p.cells[j].nu_mass);
    }
  }
  return std::min(1.0, best / nu);
}

/// Best integral selection by direct subset enumeration.
inline double hru_integral_enumeration(const WeightPanel& p, double delta) {
  const std::size_t n = p.cells.size();
  require(n <= 16, "hru_integral_enumeration: at most 16 cells");
  double m = 0.0, nu = 0.0;
  for (const auto& c : p.cells) {
    m += c.mu_mass;
    nu += c.nu_mass;
  }
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double mm = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) {
        mm += p.cells[i].mu_mass;
        vv += p.cells[i].nu_mass;
      }
    if (mm <= delta * m) best = std::max(best, vv);
  }
  return best / nu;
}

/// Two cells of equal mu-mass with densities a and b.
inline WeightPanel two_valued_panel(double a, double b) { return WeightPanel{{{1.0, a}, {1.0, b}}, Ball(Point{}, 1.0)}; }

}  // namespace gmtlab::oracle
