#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "gmtlab/error.hpp"
#include "gmtlab/measure.hpp"
#include "gmtlab/transport.hpp"

namespace gmtlab {

/// A signed atom: mass of mu minus mass of sigma at one location.
struct SignedAtom {
  Point x{};
  double d = 0.0;
};

struct CoarseningResult {
  std::vector<SignedAtom> atoms;
  /// sum |d_i| * |x_i - representative(x_i)|; bounds the change of any
  /// integral of a 1-Lipschitz function.
  double error_bound = 0.0;
};

/// Weighted k-means (weights |d|) reduction of a signed point cloud to at most
/// `target` representatives. Seeded by grid binning, refined by Lloyd steps.
/// Deterministic.
inline CoarseningResult coarsen_signed(const std::vector<SignedAtom>& atoms, int dim, std::size_t target,
                                       int lloyd_iterations = 8) {
  CoarseningResult res;
  if (atoms.size() <= target) {
    res.atoms = atoms;
    return res;
  }
  Point lo, hi;
  lo.fill(0.0);
  hi.fill(0.0);
  for (int i = 0; i < dim; ++i) {
    lo[i] = hi[i] = atoms.front().x[i];
    for (const auto& a : atoms) {
      lo[i] = std::min(lo[i], a.x[i]);
      hi[i] = std::max(hi[i], a.x[i]);
    }
  }
  double extent = 0.0;
  for (int i = 0; i < dim; ++i) extent = std::max(extent, hi[i] - lo[i]);
  if (extent <= 0.0) extent = 1.0;

  // Grid seeding: shrink the bin size until the occupied bin count fits.
  std::vector<Point> centers;
  double h = extent / std::pow(static_cast<double>(target), 1.0 / std::max(1, dim - 1));
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::map<std::array<long, kMaxDim>, std::pair<Point, double>> bins;
    for (const auto& a : atoms) {
      std::array<long, kMaxDim> key{};
      for (int i = 0; i < dim; ++i) key[i] = static_cast<long>(std::floor((a.x[i] - lo[i]) / h));
      auto& [sum, w] = bins[key];
      const double aw = std::abs(a.d) + 1e-300;
      for (int i = 0; i < dim; ++i) sum[i] += aw * a.x[i];
      w += aw;
    }
    if (bins.size() <= target) {
      centers.clear();
      for (const auto& [key, acc] : bins) centers.push_back((1.0 / acc.second) * acc.first);
      break;
    }
    h *= 1.25;
  }
  if (centers.empty()) throw SolverError("coarsen_signed: grid seeding failed");

  std::vector<std::size_t> assign(atoms.size(), 0);
  auto assign_all = [&] {
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = distance(atoms[a].x, centers[c]);
        if (d < best) {
          best = d;
          assign[a] = c;
        }
      }
    }
  };
  for (int it = 0; it < lloyd_iterations; ++it) {
    assign_all();
    std::vector<Point> sum(centers.size(), Point{});
    std::vector<double> w(centers.size(), 0.0);
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const double aw = std::abs(atoms[a].d) + 1e-300;
      for (int i = 0; i < dim; ++i) sum[assign[a]][i] += aw * atoms[a].x[i];
      w[assign[a]] += aw;
    }
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (w[c] > 0.0) centers[c] = (1.0 / w[c]) * sum[c];
  }
  assign_all();
  std::vector<double> mass(centers.size(), 0.0);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    mass[assign[a]] += atoms[a].d;
    res.error_bound += std::abs(atoms[a].d) * distance(atoms[a].x, centers[assign[a]]);
  }
  for (std::size_t c = 0; c < centers.size(); ++c)
    if (mass[c] != 0.0) res.atoms.push_back({centers[c], mass[c]});
  return res;
}

struct FBallOptions {
  /// Atoms closer than this are merged before the LP is assembled.
  double merge_tolerance = 1e-12;
  /// Above this many support points the signed measure is coarsened ...
  std::size_t coarsen_above = 5000;
  /// ... to at most this many.
  std::size_t coarsen_to = 2000;
  /// Nearest opposite-sign neighbours per atom in the initial sparse arc set.
  int neighbours = 12;
};

/// Sparse starting arc set for the ball transport problem: each atom to its
/// nearest opposite-sign atoms, plus every arc touching a ground node.
inline std::vector<std::pair<int, int>> nearest_arcs(const std::vector<Point>& src, const std::vector<Point>& snk,
                                                     bool ground_src, bool ground_snk, int k) {
  const int ps = static_cast<int>(src.size()), nt = static_cast<int>(snk.size());
  std::vector<std::pair<int, int>> arcs;
  std::vector<std::pair<double, int>> d;
  const auto take = static_cast<std::size_t>(std::max(1, k));
  for (int i = 0; i < ps; ++i) {
    d.clear();
    for (int j = 0; j < nt; ++j) d.emplace_back(distance(src[i], snk[j]), j);
    const std::size_t m = std::min(take, d.size());
    std::partial_sort(d.begin(), d.begin() + m, d.end());
    for (std::size_t t = 0; t < m; ++t) arcs.emplace_back(i, d[t].second);
  }
  for (int j = 0; j < nt; ++j) {
    d.clear();
    for (int i = 0; i < ps; ++i) d.emplace_back(distance(src[i], snk[j]), i);
    const std::size_t m = std::min(take, d.size());
    std::partial_sort(d.begin(), d.begin() + m, d.end());
    for (std::size_t t = 0; t < m; ++t) arcs.emplace_back(d[t].second, j);
  }
  if (ground_snk)
    for (int i = 0; i < ps; ++i) arcs.emplace_back(i, nt);
  if (ground_src) {
    for (int j = 0; j < nt; ++j) arcs.emplace_back(ps, j);
    if (ground_snk) arcs.emplace_back(ps, nt);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
  return arcs;
}

struct FBallResult {
  double value = 0.0;
  /// Objective of the dual certificate built from the simplex potentials.
  double dual_value = 0.0;
  double duality_gap = 0.0;
  /// Largest violation of the certificate's Lipschitz and support constraints.
  double dual_infeasibility = 0.0;
  /// Nonzero only when coarsening was applied.
  double coarsening_error = 0.0;
  std::size_t support_points = 0;
  std::size_t pivots = 0;
};

/// F_B(mu, sigma) = sup { int f d(mu - sigma) : f 1-Lipschitz, supported on B }.
///
/// The LP over values f_i at the atoms (|f_i - f_j| <= |x_i - x_j|,
/// |f_i| <= (r_B - |x_i - c_B|)_+) is solved through its dual: a transport
/// problem moving the positive part onto the negative part at Euclidean cost,
/// where any mass may also be sent to or drawn from the complement of B at
/// cost equal to the distance to the boundary sphere.
inline FBallResult f_ball_detailed(const DiscreteMeasure& mu, const DiscreteMeasure& sigma, const Ball& b,
                                   const FBallOptions& opt = {}) {
  require(mu.dim() == sigma.dim(), "f_ball: dimension mismatch");
  const int dim = mu.dim();
  std::vector<SignedAtom> raw;
  auto collect = [&](const DiscreteMeasure& m, double sign) {
    for (const auto& a : m.atoms())
      if (a.w > 0.0 && distance(a.x, b.center) < b.radius) raw.push_back({a.x, sign * a.w});
  };
  collect(mu, 1.0);
  collect(sigma, -1.0);
  std::sort(raw.begin(), raw.end(), [](const SignedAtom& p, const SignedAtom& q) { return p.x < q.x; });
  std::vector<SignedAtom> atoms;
  for (const auto& a : raw) {
    if (!atoms.empty() && distance(atoms.back().x, a.x) < opt.merge_tolerance) {
      atoms.back().d += a.d;
    } else {
      atoms.push_back(a);
    }
  }
  std::erase_if(atoms, [](const SignedAtom& a) { return a.d == 0.0; });

  FBallResult res;
  if (atoms.size() > opt.coarsen_above) {
    auto c = coarsen_signed(atoms, dim, opt.coarsen_to);
    atoms = std::move(c.atoms);
    res.coarsening_error = c.error_bound;
  }
  res.support_points = atoms.size();
  if (atoms.empty()) return res;

  std::vector<Point> src_x, snk_x;
  std::vector<double> supply, demand, src_cap, snk_cap;
  double pos = 0.0, neg = 0.0;
  for (const auto& a : atoms) {
    const double cap = std::max(0.0, b.radius - distance(a.x, b.center));
    if (a.d > 0) {
      src_x.push_back(a.x);
      supply.push_back(a.d);
      src_cap.push_back(cap);
      pos += a.d;
    } else {
      snk_x.push_back(a.x);
      demand.push_back(-a.d);
      snk_cap.push_back(cap);
      neg -= a.d;
    }
  }
  // Ground nodes stand for the complement of B; they absorb the imbalance.
  const std::size_t ps = src_x.size(), nt = snk_x.size();
  const bool ground_src = neg > 0.0, ground_snk = pos > 0.0;
  if (ground_src) supply.push_back(neg);
  if (ground_snk) demand.push_back(pos);
  auto cost = [&](int i, int j) -> double {
    const bool gi = static_cast<std::size_t>(i) == ps;
    const bool gj = static_cast<std::size_t>(j) == nt;
    if (gi && gj) return 0.0;
    if (gi) return snk_cap[j];
    if (gj) return src_cap[i];
    return distance(src_x[i], snk_x[j]);
  };
  TransportOptions topt;
  if (ground_src && ground_snk) {
    topt.hub_source = static_cast<int>(ps);
    topt.hub_sink = static_cast<int>(nt);
  }
  if (ps * nt > 4096) topt.candidate_arcs = nearest_arcs(src_x, snk_x, ground_src, ground_snk, opt.neighbours);
  const TransportSolution sol = TransportSimplex::solve(supply, demand, cost, topt);
  res.value = sol.cost;
  res.pivots = sol.pivots;

  // Dual certificate: y = -pi solves max sum b y s.t. y_u - y_v <= c_uv; the
  // test function is f = y - y_ground on each side.
  const double pi_gs = ground_src ? sol.source_pi[ps] : 0.0;
  const double pi_gt = ground_snk ? sol.sink_pi[nt] : 0.0;
  std::vector<double> f_src(ps), f_snk(nt);
  for (std::size_t i = 0; i < ps; ++i) f_src[i] = ground_snk ? pi_gt - sol.source_pi[i] : src_cap[i];
  for (std::size_t j = 0; j < nt; ++j) f_snk[j] = ground_src ? pi_gs - sol.sink_pi[j] : -snk_cap[j];
  double dual = 0.0, viol = 0.0;
  for (std::size_t i = 0; i < ps; ++i) {
    dual += supply[i] * f_src[i];
    viol = std::max(viol, std::abs(f_src[i]) - src_cap[i]);
  }
  for (std::size_t j = 0; j < nt; ++j) {
    dual -= demand[j] * f_snk[j];
    viol = std::max(viol, std::abs(f_snk[j]) - snk_cap[j]);
  }
  for (std::size_t i = 0; i < ps; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      viol = std::max(viol, std::abs(f_src[i] - f_snk[j]) - distance(src_x[i], snk_x[j]));
  res.dual_value = dual;
  res.duality_gap = std::abs(res.value - dual);
  res.dual_infeasibility = std::max(0.0, viol);
  const double scale = std::max(1.0, pos + neg) * std::max(1.0, b.radius);
  if (res.duality_gap > 1e-9 * scale) {
    throw SolverError("f_ball: duality gap " + std::to_string(res.duality_gap) + " exceeds tolerance (primal " +
                      std::to_string(res.value) + ", dual " + std::to_string(dual) + ")");
  }
  return res;
}

inline double f_ball(const DiscreteMeasure& mu, const DiscreteMeasure& sigma, const Ball& b) {
  return f_ball_detailed(mu, sigma, b).value;
}

/// F_r(mu, sigma) = F_{closed B(0, r)}(mu, sigma).
inline double f_r(const DiscreteMeasure& mu, const DiscreteMeasure& sigma, double r) {
  return f_ball(mu, sigma, Ball(Point{}, r));
}

}  // namespace gmtlab
