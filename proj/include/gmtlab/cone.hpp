#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gmtlab/bounded_lipschitz.hpp"
#include "gmtlab/elliptic.hpp"
#include "gmtlab/error.hpp"
#include "gmtlab/measure.hpp"
#include "gmtlab/optimize.hpp"
#include "gmtlab/parallel.hpp"
#include "gmtlab/polymeasure.hpp"
#include "gmtlab/rng.hpp"

namespace gmtlab {

enum class ConeKind { FlatPlanes, Homogeneous, PolyUpTo };

/// A d-cone of harmonic polynomial measures {omega_h^A : h in span(basis)}.
struct ConeSpec {
  int dim = 2;
  ConeKind kind = ConeKind::FlatPlanes;
  int k = 1;
  ConstantEllipticMatrix a = ConstantEllipticMatrix::identity(2);
  std::vector<Polynomial> basis;

  static ConeSpec flat(int dim) {
    ConeSpec c;
    c.dim = dim;
    c.kind = ConeKind::FlatPlanes;
    c.k = 1;
    c.a = ConstantEllipticMatrix::identity(dim);
    c.basis = harmonic_basis(dim, 1, c.a);
    return c;
  }

  static ConeSpec homogeneous(int dim, int k, const ConstantEllipticMatrix& a) {
    ConeSpec c;
    c.dim = dim;
    c.kind = ConeKind::Homogeneous;
    c.k = k;
    c.a = a;
    c.basis = harmonic_basis(dim, k, a);
    c.validate();
    return c;
  }

  /// Harmonic polynomials of degree 1..k vanishing at the origin.
  static ConeSpec poly_up_to(int dim, int k, const ConstantEllipticMatrix& a) {
    ConeSpec c;
    c.dim = dim;
    c.kind = ConeKind::PolyUpTo;
    c.k = k;
    c.a = a;
    for (int d = 1; d <= k; ++d)
      for (auto& b : harmonic_basis(dim, d, a)) c.basis.push_back(std::move(b));
    c.validate();
    return c;
  }

  /// "flat", "F<k>" (homogeneous of degree k) or "P<k>" (degree up to k).
  static ConeSpec parse(const std::string& name, int dim, const ConstantEllipticMatrix& a) {
    if (name == "flat" || name == "H") return flat(dim);
    if (name.size() >= 2 && (name[0] == 'F' || name[0] == 'P')) {
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(name.substr(1), &used);
        if (used != name.size() - 1) k = 0;
      } catch (const std::exception&) {
        k = 0;
      }
      require(k >= 1 && k <= kMaxBasisDegree, "cone name '" + name + "': degree must be in [1, 8]");
      return name[0] == 'F' ? homogeneous(dim, k, a) : poly_up_to(dim, k, a);
    }
    throw InvalidInput("unknown cone '" + name + "' (expected flat, F<k> or P<k>)");
  }

  std::string name() const {
    switch (kind) {
      case ConeKind::FlatPlanes:
        return "flat";
      case ConeKind::Homogeneous:
        return "F" + std::to_string(k);
      default:
        return "P" + std::to_string(k);
    }
  }

  void validate() const {
    require(!basis.empty(), "ConeSpec: empty basis");
    require(a.dim() == dim, "ConeSpec: matrix dimension mismatch");
    for (const auto& b : basis) {
      require(b.dim() == dim, "ConeSpec: basis dimension mismatch");
      require(apply_operator(a, b).pruned(1e-10).is_zero(), "ConeSpec: basis element is not L_A-harmonic");
      if (kind == ConeKind::Homogeneous)
        require(b.is_homogeneous() && b.degree() == k, "ConeSpec: basis element has the wrong degree");
    }
  }

  Polynomial combine(const std::vector<double>& c) const {
    Polynomial h(dim);
    for (std::size_t i = 0; i < basis.size(); ++i) h += c[i] * basis[i];
    return h;
  }
};

struct ConeOptions {
  int starts = 32;
  /// Starts that are refined by Nelder-Mead after all starts are screened.
  int refine = 4;
  int coarse_grid = 200;
  /// 0 uses default_grid_n.
  int fine_grid = 0;
  /// Support size of mu inside the objective.
  std::size_t objective_support = 400;
  int max_evaluations = 80;
  std::uint64_t seed = 1;
};

struct ConeDistanceResult {
  /// Upper bound for d_r(mu, cone), evaluated at the fine resolution.
  double value = 1.0;
  /// Minimizer scaled so that F_r(omega_witness) = 1 on the fine sample.
  Polynomial witness;
  std::vector<double> coefficients;
  int restarts = 0;
  int evaluations = 0;
  double coarse_value = 1.0;
  std::vector<double> trace;
};

namespace detail {

inline DiscreteMeasure normalized_in_ball(const DiscreteMeasure& mu, double r) {
  const double f = f_r(mu, r);
  require(f > 0.0, "cone_distance: F_r(mu) = 0");
  return mu.restricted(Ball(Point{}, r)).scaled(1.0 / f);
}

inline DiscreteMeasure coarsened_positive(const DiscreteMeasure& mu, std::size_t target) {
  if (mu.size() <= target) return mu;
  std::vector<SignedAtom> s;
  for (const auto& a : mu.atoms()) s.push_back({a.x, a.w});
  const auto c = coarsen_signed(s, mu.dim(), target);
  std::vector<Atom> out;
  for (const auto& a : c.atoms) out.push_back({a.x, a.d});
  return DiscreteMeasure(mu.dim(), std::move(out));
}

}  // namespace detail

/// F_r(mu / F_r(mu), omega_h / F_r(omega_h)) for h in the cone; returns 2
/// (outside the feasible range [0, 1]) when omega_h has no mass in B(0, r).
inline double cone_objective(const DiscreteMeasure& mu_normalized, const ConeSpec& cone, const Polynomial& h,
                             double r, int grid_n) {
  if (h.pruned(1e-12).degree() < 1) return 2.0;
  const DiscreteMeasure nu = sample_polymeasure(h, cone.a, r, grid_n);
  const double f = f_r(nu, r);
  if (!(f > 0.0)) return 2.0;
  return f_ball(mu_normalized, nu.scaled(1.0 / f), Ball(Point{}, r));
}

/// Upper bound for d_r(mu, cone) by multi-start Nelder-Mead over the unit
/// sphere of basis coefficients. All starts are screened on a coarse sample;
/// the best `refine` are polished; the winner is re-evaluated on the fine grid.
inline ConeDistanceResult cone_distance(const DiscreteMeasure& mu, const ConeSpec& cone, double r,
                                        const ConeOptions& opt = {}) {
  require(r > 0.0 && std::isfinite(r), "cone_distance: r must be positive");
  require(mu.dim() == cone.dim, "cone_distance: dimension mismatch");
  require(opt.starts >= 1 && opt.refine >= 1, "cone_distance: starts and refine must be positive");
  const DiscreteMeasure mun = detail::normalized_in_ball(mu, r);
  const DiscreteMeasure mu_obj = detail::coarsened_positive(mun, opt.objective_support);
  const std::size_t m = cone.basis.size();

  auto objective_at = [&](const std::vector<double>& c) {
    return cone_objective(mu_obj, cone, cone.combine(c), r, opt.coarse_grid);
  };

  // Starts: evenly spaced on the circle for a 2-dimensional basis, otherwise
  // seeded Gaussian directions together with their antipodes.
  std::vector<std::vector<double>> starts;
  if (m == 1) {
    starts = {{1.0}, {-1.0}};
  } else if (m == 2) {
    for (int s = 0; s < opt.starts; ++s) {
      const double t = 2.0 * std::numbers::pi * s / opt.starts;
      starts.push_back({std::cos(t), std::sin(t)});
    }
  } else {
    for (int s = 0; static_cast<int>(starts.size()) < opt.starts; ++s) {
      auto g = stream_rng(opt.seed, static_cast<std::uint64_t>(s));
      std::vector<double> v(m);
      double nn = 0.0;
      for (auto& x : v) {
        // Box-Muller from two 53-bit uniforms.
        const double u1 = 1.0 - uniform01(g), u2 = uniform01(g);
        x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        nn += x * x;
      }
      nn = std::sqrt(nn);
      for (auto& x : v) x /= nn;
      starts.push_back(v);
      if (static_cast<int>(starts.size()) < opt.starts) {
        for (auto& x : v) x = -x;
        starts.push_back(v);
      }
    }
  }

  ConeDistanceResult res;
  res.restarts = static_cast<int>(starts.size());
  std::vector<double> screen(starts.size());
  parallel_chunks(starts.size(), starts.size(), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) screen[i] = objective_at(starts[i]);
  });
  double best_so_far = std::numeric_limits<double>::infinity();
  for (double v : screen) {
    best_so_far = std::min(best_so_far, v);
    res.trace.push_back(best_so_far);
  }
  res.evaluations = static_cast<int>(starts.size());

  std::vector<std::size_t> order(starts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return screen[a] < screen[b]; });
  const std::size_t nref = std::min<std::size_t>(opt.refine, order.size());

  struct Local {
    std::vector<double> c;
    double value;
    NelderMeadResult nm;
  };
  std::vector<Local> local(nref);
  parallel_chunks(nref, nref, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& c0 = starts[order[i]];
      if (m == 1) {
        local[i] = {c0, screen[order[i]], {}};
        continue;
      }
      NelderMeadOptions nmo;
      nmo.initial_step = m == 2 ? std::numbers::pi / opt.starts : 0.25;
      nmo.max_evaluations = opt.max_evaluations;
      nmo.xtol = 1e-4;
      nmo.ftol = 1e-6;
      auto nm = nelder_mead([&](const std::vector<double>& ang) { return objective_at(sphere_point(ang)); },
                            sphere_angles(c0), nmo);
      local[i] = {sphere_point(nm.x), nm.value, std::move(nm)};
    }
  });
  std::size_t win = 0;
  for (std::size_t i = 0; i < nref; ++i) {
    for (double v : local[i].nm.trace) {
      best_so_far = std::min(best_so_far, v);
      res.trace.push_back(best_so_far);
    }
    res.evaluations += local[i].nm.evaluations;
    const auto& a = local[i];
    const auto& w = local[win];
    if (a.value < w.value || (a.value == w.value && a.c < w.c)) win = i;
  }
  if (!(local[win].value <= 1.0 + 1e-9)) throw SolverError("cone_distance: no start produced a normalizable witness");
  res.coarse_value = local[win].value;
  res.coefficients = local[win].c;

  const Polynomial h = cone.combine(res.coefficients);
  const DiscreteMeasure nu = sample_polymeasure(h, cone.a, r, opt.fine_grid);
  const double f = f_r(nu, r);
  if (!(f > 0.0)) throw SolverError("cone_distance: witness has no mass at the fine resolution");
  res.witness = (1.0 / f) * h;
  res.value = f_ball(mun, nu.scaled(1.0 / f), Ball(Point{}, r));
  return res;
}

struct ScanRow {
  double r = 1.0;
  double d1 = 1.0;
  int witness_degree = 0;
};

/// d_1(T_{xi,r}[mu], cone) per radius.
inline std::vector<ScanRow> scale_scan(const DiscreteMeasure& mu, const Point& xi, const ConeSpec& cone,
                                       const std::vector<double>& radii, const ConeOptions& opt = {}) {
  std::vector<ScanRow> rows;
  for (double r : radii) {
    require(r > 0.0, "scale_scan: radii must be positive");
    if (!(ball_mass(mu, Ball(xi, r)) > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "scale_scan: mu(B(xi, r)) = 0 at r = " << r;
      throw InvalidInput(os.str());
    }
    const auto res = cone_distance(translate_dilate(mu, xi, r), cone, 1.0, opt);
    rows.push_back({r, res.value, res.witness.degree()});
  }
  return rows;
}

struct DegreeTableRow {
  int k = 1;
  double r = 1.0;
  double d1 = 1.0;
};

struct DegreeDetection {
  std::optional<int> k;
  std::vector<DegreeTableRow> table;
};

/// Smallest k in 1..kmax whose scan against the homogeneous cone of degree k
/// stays below `threshold` on the last `tail` radii.
inline DegreeDetection detect_degree(const DiscreteMeasure& mu, const Point& xi, int kmax,
                                     const std::vector<double>& radii, const ConstantEllipticMatrix& a,
                                     const ConeOptions& opt = {}, double threshold = 0.05, std::size_t tail = 2) {
  require(kmax >= 1 && kmax <= kMaxBasisDegree, "detect_degree: kmax must be in [1, 8]");
  require(!radii.empty(), "detect_degree: radii must be nonempty");
  DegreeDetection out;
  for (int k = 1; k <= kmax; ++k) {
    const ConeSpec cone = k == 1 && a.entries().isIdentity() ? ConeSpec::flat(mu.dim())
                                                             : ConeSpec::homogeneous(mu.dim(), k, a);
    const auto rows = scale_scan(mu, xi, cone, radii, opt);
    double tail_max = 0.0;
    for (std::size_t i = rows.size() - std::min(tail, rows.size()); i < rows.size(); ++i)
      tail_max = std::max(tail_max, rows[i].d1);
    for (const auto& row : rows) out.table.push_back({k, row.r, row.d1});
    if (!out.k && tail_max < threshold) {
      out.k = k;
      break;
    }
  }
  return out;
}

/// Normalized bilateral Hausdorff distance, in B(x, r), between a point
/// sample and the best translated candidate zero set x + {p = 0}.
inline double flatness_theta(const std::vector<Point>& sample, const Point& x, double r,
                             const std::vector<Polynomial>& candidates, int dim = 2) {
  require(r > 0.0, "flatness_theta: r must be positive");
  require(!candidates.empty(), "flatness_theta: no candidates");
  std::vector<Point> inside;
  for (const auto& a : sample)
    if (distance(a, x) < r) inside.push_back(a);
  require(!inside.empty(), "flatness_theta: empty sample in B(x, r)");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : candidates) {
    require(p.dim() == dim, "flatness_theta: candidate dimension mismatch");
    // Zero set on B(0, 2r) at resolution r / 100.
    const auto zs = sample_polymeasure(p, ConstantEllipticMatrix::identity(dim), 2.0 * r, 400);
    std::vector<Point> z;
    for (const auto& a : zs.atoms()) z.push_back(x + a.x);
    if (z.empty()) continue;
    double to_set = 0.0;
    for (const auto& a : inside) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& q : z) d = std::min(d, distance(a, q));
      to_set = std::max(to_set, d);
    }
    double to_sample = 0.0;
    for (const auto& q : z) {
      if (distance(q, x) >= r) continue;
      double d = std::numeric_limits<double>::infinity();
      for (const auto& a : sample) d = std::min(d, distance(a, q));
      to_sample = std::max(to_sample, d);
    }
    best = std::min(best, std::max(to_set, to_sample) / r);
  }
  return best;
}

/// Least-squares exponent of mu(B(xi, r)) against r over the given radii.
inline double growth_exponent(const DiscreteMeasure& mu, const Point& xi, const std::vector<double>& radii) {
  return dimension_slope(mu, xi, radii);
}

}  // namespace gmtlab
