#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gmtlab/error.hpp"
#include "gmtlab/polynomial.hpp"

namespace gmtlab {

struct Atom {
  Point x{};
  double w = 0.0;
};

struct Ball {
  Point center{};
  double radius = 1.0;

  Ball() = default;
  Ball(const Point& c, double r) : center(c), radius(r) {
    require(r > 0.0 && std::isfinite(r), "Ball: radius must be positive");
  }
};

/// Finite weighted point cloud; the discrete stand-in for a Radon measure.
/// Immutable once built.
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(int dim = 2) : dim_(dim) {
    require(dim >= 1 && dim <= kMaxDim, "DiscreteMeasure: dimension must be in [1, 4]");
  }

  DiscreteMeasure(int dim, std::vector<Atom> atoms) : DiscreteMeasure(dim) {
    atoms_ = std::move(atoms);
    for (auto& a : atoms_) {
      require(std::isfinite(a.w) && a.w >= 0.0, "DiscreteMeasure: weights must be finite and nonnegative");
      for (int i = 0; i < kMaxDim; ++i) {
        require(std::isfinite(a.x[i]), "DiscreteMeasure: non-finite coordinate");
        if (i >= dim_) a.x[i] = 0.0;
      }
    }
  }

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  double total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.w;
    return s;
  }

  DiscreteMeasure scaled(double s) const {
    require(s >= 0.0 && std::isfinite(s), "DiscreteMeasure::scaled: factor must be nonnegative");
    std::vector<Atom> out = atoms_;
    for (auto& a : out) a.w *= s;
    return DiscreteMeasure(dim_, std::move(out));
  }

  /// Atoms strictly inside b.
  DiscreteMeasure restricted(const Ball& b) const {
    std::vector<Atom> out;
    for (const auto& a : atoms_)
      if (distance(a.x, b.center) < b.radius) out.push_back(a);
    return DiscreteMeasure(dim_, std::move(out));
  }

  /// Sum of two measures on the same space.
  friend DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    require(a.dim_ == b.dim_, "DiscreteMeasure: dimension mismatch");
    std::vector<Atom> out = a.atoms_;
    out.insert(out.end(), b.atoms_.begin(), b.atoms_.end());
    return DiscreteMeasure(a.dim_, std::move(out));
  }

 private:
  int dim_;
  std::vector<Atom> atoms_;
};

/// Merges atoms closer than tol (after a lexicographic sort) into their
/// weighted centroid. Zero-weight atoms are dropped.
inline DiscreteMeasure merged(const DiscreteMeasure& mu, double tol = 1e-12) {
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms())
    if (a.w > 0.0) atoms.push_back(a);
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  std::vector<Atom> out;
  for (const auto& a : atoms) {
    if (!out.empty() && distance(out.back().x, a.x) < tol) {
      out.back().w += a.w;
    } else {
      out.push_back(a);
    }
  }
  return DiscreteMeasure(mu.dim(), std::move(out));
}

/// Image of mu under T_{a,r}(x) = (x - a)/r.
inline DiscreteMeasure translate_dilate(const DiscreteMeasure& mu, const Point& a, double r) {
  require(r > 0.0 && std::isfinite(r), "translate_dilate: r must be positive");
  std::vector<Atom> out = mu.atoms();
  for (auto& at : out)
    for (int i = 0; i < mu.dim(); ++i) at.x[i] = (at.x[i] - a[i]) / r;
  return DiscreteMeasure(mu.dim(), std::move(out));
}

/// F_r(mu) = sum_i w_i (r - |x_i|)_+.
inline double f_r(const DiscreteMeasure& mu, double r) {
  require(r > 0.0, "f_r: r must be positive");
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.w * std::max(0.0, r - norm(a.x));
  return s;
}

/// F_B(mu) = sum_i w_i (r_B - |x_i - c_B|)_+.
inline double f_ball_mass(const DiscreteMeasure& mu, const Ball& b) {
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.w * std::max(0.0, b.radius - distance(a.x, b.center));
  return s;
}

/// Mass of the open ball b.
inline double ball_mass(const DiscreteMeasure& mu, const Ball& b) {
  double s = 0.0;
  for (const auto& a : mu.atoms())
    if (distance(a.x, b.center) < b.radius) s += a.w;
  return s;
}

/// mu(B(xi, 2r)) / mu(B(xi, r)) per radius; empty where the denominator is 0.
inline std::vector<std::optional<double>> doubling_profile(const DiscreteMeasure& mu, const Point& xi,
                                                           const std::vector<double>& radii) {
  std::vector<std::optional<double>> out;
  out.reserve(radii.size());
  for (double r : radii) {
    require(r > 0.0, "doubling_profile: radii must be positive");
    const double den = ball_mass(mu, Ball(xi, r));
    if (den > 0.0) {
      out.emplace_back(ball_mass(mu, Ball(xi, 2 * r)) / den);
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

/// Ordinary least-squares slope of ys against xs.
inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  require(sxx > 0.0, "least_squares_slope: abscissae must not all coincide");
  return sxy / sxx;
}

/// Slope of log mu(B(xi, r)) against log r.
inline double dimension_slope(const DiscreteMeasure& mu, const Point& xi, const std::vector<double>& radii) {
  require(radii.size() >= 3, "dimension_slope: at least 3 radii are required");
  std::vector<double> lx, ly;
  for (double r : radii) {
    require(r > 0.0, "dimension_slope: radii must be positive");
    const double m = ball_mass(mu, Ball(xi, r));
    if (!(m > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "dimension_slope: zero mass at radius " << r;
      throw InvalidInput(os.str());
    }
    lx.push_back(std::log(r));
    ly.push_back(std::log(m));
  }
  return least_squares_slope(lx, ly);
}

}  // namespace gmtlab
