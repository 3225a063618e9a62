#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gmtlab/error.hpp"
#include "gmtlab/io.hpp"
#include "gmtlab/polynomial.hpp"
#include "gmtlab/polynomial_parser.hpp"

namespace gmtlab {

enum class DomainKind { HalfSpace, Ball, PolySuperlevel, SlitComplement, Generic };

inline std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::HalfSpace: return "halfspace";
    case DomainKind::Ball: return "ball";
    case DomainKind::PolySuperlevel: return "polynomial";
    case DomainKind::SlitComplement: return "slit";
    case DomainKind::Generic: return "generic";
  }
  return "generic";
}

/// Open set described by oracles. dist is a lower bound for the distance to
/// the boundary at points of the domain; project returns a boundary point
/// near x; side labels the two faces of a two-sided boundary (0 otherwise).
struct ImplicitDomain {
  int dim = 2;
  DomainKind kind = DomainKind::Generic;
  std::function<bool(const Point&)> inside;
  std::function<double(const Point&)> dist;
  std::function<Point(const Point&)> project;
  std::function<int(const Point&)> side;
  /// Length scale; the walk shell is eps_shell * scale.
  double scale = 1.0;
  std::string description;

  // Halfspace {x . normal > offset}, |normal| = 1.
  Point normal{};
  double offset = 0.0;
  // Polynomial superlevel {h > 0}.
  std::optional<Polynomial> h;

  int side_of(const Point& x) const { return side ? side(x) : 0; }
};

inline Point to_point(const Eigen::VectorXd& v) {
  Point p{};
  for (int i = 0; i < v.size(); ++i) p[i] = v(i);
  return p;
}

inline Eigen::VectorXd to_vector(const Point& p, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = p[i];
  return v;
}

inline ImplicitDomain halfspace_domain(int dim, const Point& normal, double offset = 0.0) {
  require(dim >= 1 && dim <= kMaxDim, "halfspace: dimension must be in [1, 4]");
  const double n = norm(normal);
  require(n > 0.0 && std::isfinite(n), "halfspace: normal must be nonzero");
  ImplicitDomain d;
  d.dim = dim;
  d.kind = DomainKind::HalfSpace;
  d.normal = (1.0 / n) * normal;
  d.offset = offset / n;
  const Point u = d.normal;
  const double c = d.offset;
  d.inside = [u, c](const Point& x) { return dot(x, u) > c; };
  d.dist = [u, c](const Point& x) { return dot(x, u) - c; };
  d.project = [u, c](const Point& x) { return x - (dot(x, u) - c) * u; };
  d.description = "halfspace";
  return d;
}

inline ImplicitDomain ball_domain(int dim, const Point& center, double radius) {
  require(dim >= 1 && dim <= kMaxDim, "ball: dimension must be in [1, 4]");
  require(radius > 0.0 && std::isfinite(radius), "ball: radius must be positive");
  ImplicitDomain d;
  d.dim = dim;
  d.kind = DomainKind::Ball;
  d.scale = radius;
  d.inside = [center, radius](const Point& x) { return distance(x, center) < radius; };
  d.dist = [center, radius](const Point& x) { return radius - distance(x, center); };
  d.project = [center, radius, dim](const Point& x) {
    const double r = distance(x, center);
    if (r == 0.0) {
      Point e{};
      e[dim - 1] = radius;
      return center + e;
    }
    return center + (radius / r) * (x - center);
  };
  d.description = "ball";
  return d;
}

/// The plane minus the segment [-1, 1] x {0}; the side is the sign of y.
inline ImplicitDomain slit_domain() {
  ImplicitDomain d;
  d.dim = 2;
  d.kind = DomainKind::SlitComplement;
  auto nearest = [](const Point& x) { return make_point({std::clamp(x[0], -1.0, 1.0), 0.0}); };
  d.inside = [nearest](const Point& x) { return distance(x, nearest(x)) > 0.0; };
  d.dist = [nearest](const Point& x) { return distance(x, nearest(x)); };
  d.project = nearest;
  d.side = [](const Point& x) { return x[1] >= 0.0 ? 1 : -1; };
  d.description = "slit";
  return d;
}

namespace detail {

// Taylor data of h: for every multi-index a with |a| >= 1 the polynomial
// D^a h / a!, grouped by |a|.
struct TaylorTable {
  std::vector<std::vector<CompiledPolynomial>> by_degree;
};

inline TaylorTable taylor_table(const Polynomial& h) {
  TaylorTable t;
  const int n = h.dim(), deg = h.degree();
  t.by_degree.resize(deg + 1);
  for (int k = 1; k <= deg; ++k)
    for (const auto& m : monomials_of_degree(n, k)) {
      Polynomial p = h;
      double fact = 1.0;
      for (int i = 0; i < n; ++i)
        for (int e = 1; e <= m[i]; ++e) {
          p = p.derivative(i);
          fact *= e;
        }
      if (!p.is_zero()) t.by_degree[k].emplace_back((1.0 / fact) * p);
    }
  return t;
}

// Largest rho with sum_k A_k rho^k <= |h(x)|, A_k = sum |D^a h(x)| / a! over
// |a| = k. h has no zero in the open ball B(x, rho).
inline double taylor_radius(const CompiledPolynomial& h, const TaylorTable& t, const Point& x) {
  const double v = std::abs(h(x));
  if (v == 0.0) return 0.0;
  std::vector<double> a(t.by_degree.size(), 0.0);
  for (std::size_t k = 1; k < t.by_degree.size(); ++k)
    for (const auto& p : t.by_degree[k]) a[k] += std::abs(p(x));
  auto g = [&](double r) {
    double s = 0.0, rk = 1.0;
    for (std::size_t k = 1; k < a.size(); ++k) {
      rk *= r;
      s += a[k] * rk;
    }
    return s;
  };
  double hi = 1.0;
  while (g(hi) < v) {
    hi *= 2.0;
    if (hi > 1e12) return hi;
  }
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) <= v ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace detail

/// {h > 0}. Distances come from the Taylor bound above, projections from
/// damped Newton steps onto {h = 0}.
inline ImplicitDomain polynomial_domain(const Polynomial& h, double scale = 1.0) {
  require(!h.is_zero() && h.degree() >= 1, "polynomial domain: h must be nonconstant");
  require(h.degree() < 16, "polynomial domain: degree must be below 16");
  ImplicitDomain d;
  d.dim = h.dim();
  d.kind = DomainKind::PolySuperlevel;
  d.scale = scale;
  d.h = h;
  auto ch = std::make_shared<CompiledPolynomial>(h);
  auto table = std::make_shared<detail::TaylorTable>(detail::taylor_table(h));
  auto field = std::make_shared<PolynomialField>(h);
  const double tol = 1e-10 * std::max(1.0, h.max_abs_coefficient());
  d.inside = [ch](const Point& x) { return (*ch)(x) > 0.0; };
  d.dist = [ch, table](const Point& x) {
    const double v = (*ch)(x);
    if (!(v > 0.0)) return 0.0;
    return detail::taylor_radius(*ch, *table, x);
  };
  d.project = [field, tol](const Point& x) {
    Point p = x;
    Point g;
    double v = field->value_and_gradient(p, g);
    for (int it = 0; it < 50 && std::abs(v) > tol; ++it) {
      const double gg = dot(g, g);
      if (!(gg > 0.0)) break;
      double t = 1.0;
      for (int half = 0; half < 30; ++half) {
        const Point q = p - (t * v / gg) * g;
        Point gq;
        const double vq = field->value_and_gradient(q, gq);
        if (std::abs(vq) < std::abs(v)) {
          p = q;
          v = vq;
          g = gq;
          break;
        }
        t *= 0.5;
      }
    }
    return p;
  };
  d.description = "polynomial " + h.to_string();
  return d;
}

/// Image M(Omega) of a domain under an invertible linear map.
inline ImplicitDomain affine_image(const ImplicitDomain& dom, const Eigen::MatrixXd& m) {
  require(m.rows() == dom.dim && m.cols() == dom.dim, "affine_image: matrix dimension mismatch");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  require(lu.isInvertible(), "affine_image: matrix is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  const int n = dom.dim;
  const double lip = Eigen::JacobiSVD<Eigen::MatrixXd>(inv).singularValues()(0);
  const double stretch = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);

  if (dom.kind == DomainKind::HalfSpace) {
    // x . u > c  iff  y . (M^-T u) > c for y = M x.
    const Eigen::VectorXd nu = inv.transpose() * to_vector(dom.normal, n);
    auto out = halfspace_domain(n, to_point(nu), dom.offset);
    out.scale = dom.scale * stretch;
    return out;
  }
  if (dom.kind == DomainKind::PolySuperlevel) {
    auto out = polynomial_domain(dom.h->composed(inv), dom.scale * stretch);
    return out;
  }
  ImplicitDomain out;
  out.dim = n;
  out.kind = DomainKind::Generic;
  out.scale = dom.scale * stretch;
  auto pull = [inv, n](const Point& y) { return to_point(inv * to_vector(y, n)); };
  auto push = [m, n](const Point& x) { return to_point(m * to_vector(x, n)); };
  out.inside = [dom, pull](const Point& y) { return dom.inside(pull(y)); };
  out.dist = [dom, pull, lip](const Point& y) { return dom.dist(pull(y)) / lip; };
  out.project = [dom, pull, push](const Point& y) { return push(dom.project(pull(y))); };
  if (dom.side) out.side = [dom, pull](const Point& y) { return dom.side(pull(y)); };
  out.description = "linear image of " + dom.description;
  return out;
}

/// Wraps user oracles; dist must be a lower bound for the boundary distance.
inline ImplicitDomain generic_domain(int dim, std::function<bool(const Point&)> inside,
                                     std::function<double(const Point&)> dist,
                                     std::function<Point(const Point&)> project, double scale = 1.0) {
  require(dim >= 1 && dim <= kMaxDim, "generic domain: dimension must be in [1, 4]");
  require(inside && dist && project, "generic domain: all oracles are required");
  ImplicitDomain d;
  d.dim = dim;
  d.kind = DomainKind::Generic;
  d.inside = std::move(inside);
  d.dist = std::move(dist);
  d.project = std::move(project);
  d.scale = scale;
  d.description = "generic";
  return d;
}

inline Point point_from_json(const nlohmann::json& j, int dim, const std::string& what) {
  require(j.is_array() && static_cast<int>(j.size()) == dim,
          what + ": expected an array of " + std::to_string(dim) + " numbers");
  Point p{};
  for (int i = 0; i < dim; ++i) {
    require(j[i].is_number(), what + ": expected numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    require(ok, what + ": unknown field '" + it.key() + "'");
  }
}

}  // namespace detail

/// {"kind": "halfspace", "dim": 2, "normal": [0, 1], "offset": 0}
/// {"kind": "ball", "center": [0, 0], "radius": 1}
/// {"kind": "polynomial", "dim": 2, "h": "y - x^2"}
/// {"kind": "slit"}
/// Any of these may carry "map": [[...], ...] for the linear image.
inline ImplicitDomain domain_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("kind") && j["kind"].is_string(), "domain: object with a 'kind' string expected");
  const std::string kind = j["kind"];
  ImplicitDomain d;
  if (kind == "halfspace") {
    detail::reject_unknown(j, {"kind", "dim", "normal", "offset", "map"}, "domain");
    const int dim = j.value("dim", 2);
    require(j.contains("normal"), "domain: halfspace needs 'normal'");
    d = halfspace_domain(dim, point_from_json(j["normal"], dim, "normal"), j.value("offset", 0.0));
  } else if (kind == "ball") {
    detail::reject_unknown(j, {"kind", "center", "radius", "map"}, "domain");
    require(j.contains("center") && j["center"].is_array(), "domain: ball needs 'center'");
    const int dim = static_cast<int>(j["center"].size());
    d = ball_domain(dim, point_from_json(j["center"], dim, "center"), j.value("radius", 1.0));
  } else if (kind == "polynomial") {
    detail::reject_unknown(j, {"kind", "dim", "h", "map"}, "domain");
    require(j.contains("h") && j["h"].is_string(), "domain: polynomial needs 'h'");
    d = polynomial_domain(parse_polynomial(j["h"].get<std::string>(), j.value("dim", 2)));
  } else if (kind == "slit") {
    detail::reject_unknown(j, {"kind", "map"}, "domain");
    d = slit_domain();
  } else {
    throw InvalidInput("domain: unknown kind '" + kind + "'");
  }
  if (j.contains("map")) d = affine_image(d, matrix_from_json(j["map"]));
  return d;
}

}  // namespace gmtlab
