#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmtlab/bounded_lipschitz.hpp"
#include "gmtlab/elliptic.hpp"
#include "gmtlab/error.hpp"
#include "gmtlab/measure.hpp"
#include "gmtlab/parallel.hpp"
#include "gmtlab/polynomial.hpp"

namespace gmtlab {

/// Default quadrature resolution per axis over the diameter of the sampling ball.
inline int default_grid_n(int dim) {
  switch (dim) {
    case 1:
    case 2:
      return 800;
    case 3:
      return 160;
    default:
      return 48;
  }
}

struct PolyMeasureSpec {
  Polynomial h;
  ConstantEllipticMatrix a = ConstantEllipticMatrix::identity(2);
  double radius = 1.0;
  /// Half-width of the shell {|h| < eps} in units of h. 0 picks 4 grid cells
  /// at the largest gradient in the ball.
  double shell_eps = 0.0;
  /// Cells per axis across the diameter 2R. 0 picks default_grid_n(dim), or a
  /// resolution fine enough for an explicitly given shell_eps.
  int grid_n = 0;
  /// Merge projected atoms that land in the same grid cell.
  bool merge_cells = true;
};

struct PolyMeasureDiagnostics {
  double shell_eps = 0.0;
  double grid_step = 0.0;
  double max_gradient = 0.0;
  std::size_t shell_cells = 0;
  std::size_t skipped_cells = 0;
  double skipped_mass = 0.0;
  std::size_t newton_failures = 0;
  std::size_t atoms_before_merge = 0;
};

struct PolyMeasureSample {
  DiscreteMeasure measure;
  PolyMeasureDiagnostics diagnostics;
};

namespace detail {

// Cubic B-spline on [-1, 1] with unit integral.
inline double bspline_kernel(double t) {
  const double s = 2.0 * std::abs(t);
  if (s >= 2.0) return 0.0;
  if (s <= 1.0) return (4.0 - 6.0 * s * s + 3.0 * s * s * s) / 3.0;
  const double u = 2.0 - s;
  return u * u * u / 3.0;
}

struct Grid {
  int dim = 2;
  long n = 0;  // nodes per axis
  double lo = 0.0, step = 1.0;

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
    return s;
  }
  Point center(std::size_t idx) const {
    Point x{};
    for (int i = 0; i < dim; ++i) {
      x[i] = lo + (static_cast<double>(idx % n) + 0.5) * step;
      idx /= n;
    }
    return x;
  }
  std::int64_t key(const Point& x) const {
    std::int64_t k = 0, mul = 1;
    for (int i = 0; i < dim; ++i) {
      // Keys live on the dual grid so that zero sets along cell faces do
      // not split between neighbours.
      const auto c = static_cast<std::int64_t>(std::floor((x[i] - lo) / step + 0.5));
      k += c * mul;
      mul *= n + 3;
    }
    return k;
  }
};

inline Grid make_grid(int dim, double half_side, double step) {
  Grid g;
  g.dim = dim;
  g.n = std::max<long>(2, static_cast<long>(std::ceil(2.0 * half_side / step)));
  g.step = step;
  g.lo = -0.5 * g.n * step;
  return g;
}

// Damped Newton along grad h / |grad h|^2. Returns false if |h| did not drop
// below tol within max_steps.
inline bool newton_project(const PolynomialField& f, Point& p, double tol, int max_steps = 20) {
  Point g;
  double v = f.value_and_gradient(p, g);
  for (int it = 0; it < max_steps; ++it) {
    if (std::abs(v) < tol) return true;
    const double gg = dot(g, g);
    if (!(gg > 0.0)) return false;
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 12; ++half) {
      const Point q = p - (t * v / gg) * g;
      Point gq;
      const double vq = f.value_and_gradient(q, gq);
      if (std::abs(vq) < std::abs(v)) {
        p = q;
        v = vq;
        g = gq;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return std::abs(v) < tol;
  }
  return std::abs(v) < tol;
}

// Largest |h| and |grad h| at the nodes of a probe grid inside B(0, R).
inline std::pair<double, double> probe_scales(const PolynomialField& f, int dim, double radius) {
  const int probe = dim <= 2 ? 256 : (dim == 3 ? 48 : 20);
  const Grid g = make_grid(dim, radius, 2.0 * radius / probe);
  double hmax = 0.0, gmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.center(i);
    if (norm(x) >= radius) continue;
    Point gr;
    hmax = std::max(hmax, std::abs(f.value_and_gradient(x, gr)));
    gmax = std::max(gmax, norm(gr));
  }
  return {hmax, gmax};
}

}  // namespace detail

/// Discrete approximation of omega_h^A restricted to B(0, R): the measure
/// with density grad h . A grad h / |grad h| on the zero set of h.
///
/// Co-area shell quadrature: every grid cell contributes
/// volume * (grad h . A grad h) * K_eps(h) with K_eps a unit-mass cubic
/// B-spline of half-width eps, placed at the Newton projection of the cell
/// center onto {h = 0}.
inline PolyMeasureSample sample_polymeasure(const PolyMeasureSpec& spec) {
  const Polynomial& h = spec.h;
  const int dim = h.dim();
  require(spec.a.dim() == dim, "sample_polymeasure: matrix dimension does not match polynomial");
  require(h.degree() >= 1, "sample_polymeasure: h must be nonconstant");
  require(spec.radius > 0.0 && std::isfinite(spec.radius), "sample_polymeasure: radius must be positive");
  require(spec.shell_eps >= 0.0, "sample_polymeasure: shell_eps must be positive");
  require(spec.grid_n >= 0, "sample_polymeasure: grid_n must be positive");

  const PolynomialField field(h);
  const double R = spec.radius;
  const auto [hmax, gmax] = detail::probe_scales(field, dim, R);

  int grid_n = spec.grid_n;
  if (grid_n == 0) {
    grid_n = default_grid_n(dim);
    if (spec.shell_eps > 0.0 && gmax > 0.0) {
      const double want = std::ceil(8.0 * R * gmax / spec.shell_eps);
      const double cap = dim <= 2 ? 20000.0 : (dim == 3 ? 400.0 : 80.0);
      grid_n = static_cast<int>(std::clamp(want, static_cast<double>(grid_n), cap));
    }
  }
  const double step = 2.0 * R / grid_n;
  double eps = spec.shell_eps > 0.0 ? spec.shell_eps : 4.0 * step * std::max(gmax, 1e-300);
  if (spec.shell_eps > 0.0 && gmax > 0.0 && eps < 2.0 * step * gmax) {
    std::ostringstream os;
    os << "sample_polymeasure: shell not resolved (eps " << eps << " needs grid step <= " << eps / (2.0 * gmax)
       << ", have " << step << ")";
    throw InvalidInput(os.str());
  }

  PolyMeasureDiagnostics diag;
  diag.shell_eps = eps;
  diag.grid_step = step;
  diag.max_gradient = gmax;

  const double margin = 0.25 * R;
  const detail::Grid grid = detail::make_grid(dim, R + margin, step);
  const double vol = std::pow(step, dim);
  const double tol = 1e-12 * std::max(hmax, 1e-300);
  const double grad_floor = 1e-8 * gmax;
  const Eigen::MatrixXd& A = spec.a.entries();

  struct Raw {
    std::int64_t key;
    Point x;
    double w;
  };
  struct ChunkOut {
    std::vector<Raw> atoms;
    std::size_t shell = 0, skipped = 0, failures = 0;
    double skipped_mass = 0.0;
  };
  std::vector<ChunkOut> outs(kDefaultChunks);
  parallel_chunks(grid.size(), kDefaultChunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    ChunkOut& out = outs[c];
    for (std::size_t idx = b; idx < e; ++idx) {
      const Point x = grid.center(idx);
      Point g;
      const double v = field.value_and_gradient(x, g);
      const double k = detail::bspline_kernel(v / eps) / eps;
      if (k <= 0.0) continue;
      ++out.shell;
      double quad = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) quad += g[i] * A(i, j) * g[j];
      const double w = vol * quad * k;
      if (norm(g) < grad_floor) {
        ++out.skipped;
        if (norm(x) < R) out.skipped_mass += w;
        continue;
      }
      Point p = x;
      if (!detail::newton_project(field, p, tol)) {
        ++out.failures;
        p = x;
      }
      if (norm(p) >= R) continue;
      out.atoms.push_back({grid.key(p), p, w});
    }
  });

  std::vector<Raw> raw;
  for (auto& o : outs) {
    diag.shell_cells += o.shell;
    diag.skipped_cells += o.skipped;
    diag.skipped_mass += o.skipped_mass;
    diag.newton_failures += o.failures;
    raw.insert(raw.end(), o.atoms.begin(), o.atoms.end());
  }
  diag.atoms_before_merge = raw.size();
  if (raw.empty() && diag.skipped_cells > 0) {
    throw DegenerateVariety("sample_polymeasure: gradient vanishes on the whole shell");
  }

  std::vector<Atom> atoms;
  if (!spec.merge_cells) {
    atoms.reserve(raw.size());
    for (const auto& r : raw) atoms.push_back({r.x, r.w});
  } else {
    std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.key < b.key; });
    for (std::size_t i = 0; i < raw.size();) {
      std::size_t j = i;
      Point sum{};
      double w = 0.0;
      for (; j < raw.size() && raw[j].key == raw[i].key; ++j) {
        sum = sum + raw[j].w * raw[j].x;
        w += raw[j].w;
      }
      Point p = (1.0 / w) * sum;
      if (!detail::newton_project(field, p, tol)) p = raw[i].x;
      if (norm(p) >= R) p = raw[i].x;
      atoms.push_back({p, w});
      i = j;
    }
  }
  return {DiscreteMeasure(dim, std::move(atoms)), diag};
}

inline DiscreteMeasure sample_polymeasure(const Polynomial& h, const ConstantEllipticMatrix& a, double radius,
                                          int grid_n = 0) {
  PolyMeasureSpec spec;
  spec.h = h;
  spec.a = a;
  spec.radius = radius;
  spec.grid_n = grid_n;
  return sample_polymeasure(spec).measure;
}

/// phi(x) = q(x) * (1 - |x - c|^2 / rho^2)_+^p, a polynomial inside its ball.
struct TestFunction {
  Point center{};
  double radius = 1.0;
  int power = 3;
  Polynomial q = Polynomial::constant(2, 1.0);

  static TestFunction bump(int dim, const Point& center, double radius, int power = 3) {
    TestFunction t;
    t.center = center;
    t.radius = radius;
    t.power = power;
    t.q = Polynomial::constant(dim, 1.0);
    return t;
  }

  int dim() const { return q.dim(); }

  void validate() const {
    require(radius > 0.0 && std::isfinite(radius), "test function: radius must be positive");
    require(power >= 2 && power <= 8, "test function: power must be in [2, 8] for a C^1 bump with L^inf Hessian");
    require(!q.is_zero(), "test function: polynomial factor must be nonzero");
  }

  /// The polynomial that agrees with phi on the open support ball.
  Polynomial inner_polynomial() const {
    const int n = dim();
    Polynomial s = Polynomial::constant(n, 1.0);
    for (int i = 0; i < n; ++i) {
      const Polynomial d = Polynomial::variable(n, i) - Polynomial::constant(n, center[i]);
      s = s - (1.0 / (radius * radius)) * (d * d);
    }
    return q * s.power(power);
  }

  double operator()(const Point& x) const {
    const double t = 1.0 - dot(x - center, x - center) / (radius * radius);
    return t > 0.0 ? q(x) * std::pow(t, power) : 0.0;
  }
};

/// Sum of phi(x_i) w_i.
inline double pair_measure(const DiscreteMeasure& mu, const TestFunction& phi) {
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.w * phi(a.x);
  return s;
}

/// Midpoint volume quadrature of the integral over {h > 0} of
/// h * sum_ij a_ij d_i d_j phi, which equals the integral of phi against
/// omega_h^A and is nonnegative for nonnegative phi.
inline double weak_pairing(const Polynomial& h, const ConstantEllipticMatrix& a, const TestFunction& phi,
                           int grid_n = 0) {
  phi.validate();
  const int dim = h.dim();
  require(a.dim() == dim && phi.dim() == dim, "weak_pairing: dimension mismatch");
  if (grid_n == 0) grid_n = dim <= 2 ? 2000 : (dim == 3 ? 200 : 60);
  require(grid_n >= 2, "weak_pairing: grid_n must be at least 2");

  const CompiledPolynomial hc(h);
  const CompiledPolynomial lphi(apply_operator(a, phi.inner_polynomial()));
  const double step = 2.0 * phi.radius / grid_n;
  const double vol = std::pow(step, dim);
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(grid_n);

  std::vector<double> partial(kDefaultChunks, 0.0);
  parallel_chunks(total, kDefaultChunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t idx = b; idx < e; ++idx) {
      Point x{};
      std::size_t r = idx;
      for (int i = 0; i < dim; ++i) {
        x[i] = phi.center[i] - phi.radius + (static_cast<double>(r % grid_n) + 0.5) * step;
        r /= grid_n;
      }
      if (distance(x, phi.center) >= phi.radius) continue;
      const double hv = hc(x);
      if (hv <= 0.0) continue;
      s += hv * lphi(x);
    }
    partial[c] = s;
  });
  double s = 0.0;
  for (double v : partial) s += v;
  return s * vol;
}

/// Image of mu under x -> m x, weights multiplied by scale.
/// translate_dilate(mu, 0, r) is linear_pushforward(mu, I / r, 1).
inline DiscreteMeasure linear_pushforward(const DiscreteMeasure& mu, const Eigen::MatrixXd& m, double scale) {
  const int dim = mu.dim();
  require(m.rows() == dim && m.cols() == dim, "linear_pushforward: matrix dimension mismatch");
  require(scale > 0.0 && std::isfinite(scale), "linear_pushforward: scale must be positive");
  require(m.allFinite(), "linear_pushforward: non-finite matrix entry");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (lu.rank() < dim) throw InvalidInput("linear_pushforward: matrix is singular");
  std::vector<Atom> out;
  out.reserve(mu.size());
  for (const auto& a : mu.atoms()) {
    Atom b;
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += m(i, j) * a.x[j];
      b.x[i] = s;
    }
    b.w = a.w * scale;
    out.push_back(b);
  }
  return DiscreteMeasure(dim, std::move(out));
}

struct ScalingRow {
  double r = 1.0;
  double measured = 1.0;   // F_r / F_1
  double predicted = 1.0;  // r^(n+k)
  double rel_err = 0.0;
};

struct DilationRow {
  double r = 1.0;
  /// F_{B(0,1)} distance between T_{0,r}[omega_h] and r^(n-1) omega_{h(r .)}.
  double discrepancy = 0.0;
  /// F_1 of the right-hand side, for relative comparison.
  double scale = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::vector<DilationRow> dilation;
};

struct ScalingOptions {
  bool radius_law = true;
  bool dilation_law = true;
  int grid_n = 0;
};

/// Checks F_r(omega_h) = r^(n+k) F_1(omega_h) (homogeneous h of degree k in
/// R^(n+1)) and T_{0,r}[omega_h] = r^(n-1) omega_{h(r .)} per radius.
inline ScalingReport scaling_report(const Polynomial& h, const ConstantEllipticMatrix& a,
                                    const std::vector<double>& radii, const ScalingOptions& opt = {}) {
  for (double r : radii) require(r > 0.0 && std::isfinite(r), "scaling_report: radii must be positive");
  const int n = h.dim() - 1;
  ScalingReport rep;
  if (opt.radius_law) {
    if (!h.is_homogeneous()) {
      std::ostringstream os;
      os << "scaling_report: the F_r law needs homogeneous h; h has parts of degree";
      for (const auto& [k, part] : homogeneous_parts(h)) os << ' ' << k;
      throw InvalidInput(os.str());
    }
    const int k = h.degree();
    const double f1 = f_r(sample_polymeasure(h, a, 1.0, opt.grid_n), 1.0);
    require(f1 > 0.0, "scaling_report: F_1 of the sample is zero");
    for (double r : radii) {
      ScalingRow row;
      row.r = r;
      row.measured = f_r(sample_polymeasure(h, a, r, opt.grid_n), r) / f1;
      row.predicted = std::pow(r, n + k);
      row.rel_err = std::abs(row.measured - row.predicted) / row.predicted;
      rep.rows.push_back(row);
    }
  }
  if (opt.dilation_law) {
    for (double r : radii) {
      const DiscreteMeasure lhs = translate_dilate(sample_polymeasure(h, a, r, opt.grid_n), Point{}, r);
      const DiscreteMeasure rhs = sample_polymeasure(h.dilated(r), a, 1.0, opt.grid_n).scaled(std::pow(r, n - 1));
      DilationRow row;
      row.r = r;
      row.discrepancy = f_ball(lhs, rhs, Ball(Point{}, 1.0));
      row.scale = f_r(rhs, 1.0);
      rep.dilation.push_back(row);
    }
  }
  return rep;
}

}  // namespace gmtlab
