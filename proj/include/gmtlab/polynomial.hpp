#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gmtlab/error.hpp"

namespace gmtlab {

/// Largest supported ambient dimension n+1.
inline constexpr int kMaxDim = 4;
/// Largest degree for which bases of harmonic polynomials are built.
inline constexpr int kMaxBasisDegree = 8;

/// A point of R^{n+1}; coordinates beyond the ambient dimension stay zero.
using Point = std::array<double, kMaxDim>;

inline Point make_point(std::initializer_list<double> xs) {
  Point p{};
  int i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < kMaxDim; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < kMaxDim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline Point operator+(Point a, const Point& b) {
  for (int i = 0; i < kMaxDim; ++i) a[i] += b[i];
  return a;
}

inline Point operator-(Point a, const Point& b) {
  for (int i = 0; i < kMaxDim; ++i) a[i] -= b[i];
  return a;
}

inline Point operator*(double s, Point a) {
  for (auto& x : a) x *= s;
  return a;
}

/// Exponent vector alpha of a monomial x^alpha.
class MultiIndex {
 public:
  explicit MultiIndex(int dim) : dim_(static_cast<std::uint8_t>(dim)) {
    require(dim >= 1 && dim <= kMaxDim, "MultiIndex: dimension must be in [1, 4]");
  }

  MultiIndex(std::initializer_list<int> exps) : MultiIndex(static_cast<int>(exps.size())) {
    int i = 0;
    for (int e : exps) set(i++, e);
  }

  template <typename Range>
  static MultiIndex from_range(const Range& exps) {
    MultiIndex m(static_cast<int>(std::size(exps)));
    int i = 0;
    for (auto e : exps) m.set(i++, static_cast<int>(e));
    return m;
  }

  int dim() const { return dim_; }
  int operator[](int i) const { return e_[i]; }

  void set(int i, int e) {
    require(i >= 0 && i < dim_, "MultiIndex: coordinate out of range");
    require(e >= 0 && e <= 255, "MultiIndex: exponent must be in [0, 255]");
    e_[i] = static_cast<std::uint8_t>(e);
  }

  int degree() const {
    int d = 0;
    for (int i = 0; i < dim_; ++i) d += e_[i];
    return d;
  }

  MultiIndex operator+(const MultiIndex& o) const {
    MultiIndex r(dim_);
    for (int i = 0; i < dim_; ++i) r.set(i, e_[i] + o.e_[i]);
    return r;
  }

  /// Graded order: lower degree first, then x_0-heavy monomials first.
  std::strong_ordering operator<=>(const MultiIndex& o) const {
    if (auto c = dim_ <=> o.dim_; c != 0) return c;
    if (auto c = degree() <=> o.degree(); c != 0) return c;
    for (int i = 0; i < dim_; ++i)
      if (auto c = o.e_[i] <=> e_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }
  bool operator==(const MultiIndex& o) const = default;

 private:
  std::array<std::uint8_t, kMaxDim> e_{};
  std::uint8_t dim_;
};

/// All multi-indices of dimension `dim` and total degree exactly `k`, in the
/// graded order of MultiIndex.
inline std::vector<MultiIndex> monomials_of_degree(int dim, int k) {
  std::vector<MultiIndex> out;
  MultiIndex m(dim);
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == dim - 1) {
      m.set(i, left);
      out.push_back(m);
      return;
    }
    for (int e = left; e >= 0; --e) {
      m.set(i, e);
      self(self, i + 1, left - e);
    }
  };
  if (k >= 0) rec(rec, 0, k);
  return out;
}

/// Sparse real polynomial in dim variables. Zero coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double>;

  explicit Polynomial(int dim = 2) : dim_(dim) {
    require(dim >= 1 && dim <= kMaxDim, "Polynomial: dimension must be in [1, 4]");
  }

  static Polynomial constant(int dim, double c) {
    Polynomial p(dim);
    p.add_term(MultiIndex(dim), c);
    return p;
  }

  static Polynomial variable(int dim, int i) {
    require(i >= 0 && i < dim, "Polynomial::variable: index out of range");
    MultiIndex m(dim);
    m.set(i, 1);
    return monomial(m, 1.0);
  }

  static Polynomial monomial(const MultiIndex& m, double c) {
    Polynomial p(m.dim());
    p.add_term(m, c);
    return p;
  }

  /// Linear form sum_j row[j] x_j.
  static Polynomial linear(int dim, const double* row) {
    Polynomial p(dim);
    for (int j = 0; j < dim; ++j) {
      MultiIndex m(dim);
      m.set(j, 1);
      p.add_term(m, row[j]);
    }
    return p;
  }

  int dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Maximal total degree; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  int min_degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = d < 0 ? m.degree() : std::min(d, m.degree());
    return d;
  }

  bool is_homogeneous() const { return !is_zero() && degree() == min_degree(); }

  double coefficient(const MultiIndex& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  void add_term(const MultiIndex& m, double c) {
    require(m.dim() == dim_, "Polynomial: multi-index dimension mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  double operator()(const Point& x) const {
    double s = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c;
      for (int i = 0; i < dim_; ++i)
        for (int e = 0; e < m[i]; ++e) t *= x[i];
      s += t;
    }
    return s;
  }

  Polynomial derivative(int i) const {
    require(i >= 0 && i < dim_, "Polynomial::derivative: index out of range");
    Polynomial d(dim_);
    for (const auto& [m, c] : terms_) {
      if (m[i] == 0) continue;
      MultiIndex n = m;
      n.set(i, m[i] - 1);
      d.add_term(n, c * m[i]);
    }
    return d;
  }

  Polynomial homogeneous_part(int k) const {
    Polynomial p(dim_);
    for (const auto& [m, c] : terms_)
      if (m.degree() == k) p.terms_.emplace(m, c);
    return p;
  }

  /// Drops coefficients with |c| <= rel * max|c|.
  Polynomial pruned(double rel) const {
    const double cut = rel * max_abs_coefficient();
    Polynomial p(dim_);
    for (const auto& [m, c] : terms_)
      if (std::abs(c) > cut) p.terms_.emplace(m, c);
    return p;
  }

  /// x -> h(r x).
  Polynomial dilated(double r) const {
    Polynomial p(dim_);
    for (const auto& [m, c] : terms_) p.add_term(m, c * std::pow(r, m.degree()));
    return p;
  }

  /// Coefficients of v -> h(a + v), the Taylor expansion of h at a.
  Polynomial shifted(const Point& a) const {
    Polynomial out(dim_);
    for (const auto& [m, c] : terms_) {
      Polynomial t = constant(dim_, c);
      for (int i = 0; i < dim_; ++i) {
        if (m[i] == 0) continue;
        Polynomial f = variable(dim_, i) + constant(dim_, a[i]);
        t = t * f.power(m[i]);
      }
      out += t;
    }
    return out;
  }

  /// x -> h(M x) by exact multinomial expansion; coefficients below 1e-14 of
  /// the largest are pruned.
  Polynomial composed(const Eigen::MatrixXd& M) const {
    require(M.rows() == dim_ && M.cols() == dim_, "Polynomial::composed: matrix dimension mismatch");
    std::vector<Polynomial> rows;
    for (int i = 0; i < dim_; ++i) {
      std::array<double, kMaxDim> r{};
      for (int j = 0; j < dim_; ++j) r[j] = M(i, j);
      rows.push_back(linear(dim_, r.data()));
    }
    Polynomial out(dim_);
    for (const auto& [m, c] : terms_) {
      Polynomial t = constant(dim_, c);
      for (int i = 0; i < dim_; ++i)
        if (m[i] > 0) t = t * rows[i].power(m[i]);
      out += t;
    }
    return out.pruned(1e-14);
  }

  Polynomial power(int e) const {
    Polynomial r = constant(dim_, 1.0);
    for (int i = 0; i < e; ++i) r = r * *this;
    return r;
  }

  Polynomial& operator+=(const Polynomial& o) {
    require(o.dim_ == dim_, "Polynomial: dimension mismatch");
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    require(o.dim_ == dim_, "Polynomial: dimension mismatch");
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    require(a.dim_ == b.dim_, "Polynomial: dimension mismatch");
    Polynomial p(a.dim_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) p.add_term(ma + mb, ca * cb);
    return p;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

  /// Human-readable infix form using variables x, y, z, w.
  std::string to_string() const {
    if (is_zero()) return "0";
    static constexpr char kVars[] = {'x', 'y', 'z', 'w'};
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [m, c] = *it;
      double a = c;
      if (!first) {
        os << (a < 0 ? " - " : " + ");
        a = std::abs(a);
      } else if (a < 0 && m.degree() > 0 && a == -1.0) {
        os << "-";
        a = 1.0;
      }
      first = false;
      bool wrote = false;
      if (a != 1.0 || m.degree() == 0) {
        os << a;
        wrote = true;
      }
      for (int i = 0; i < dim_; ++i) {
        if (m[i] == 0) continue;
        if (wrote) os << "*";
        os << kVars[i];
        if (m[i] > 1) os << "^" << m[i];
        wrote = true;
      }
    }
    return os.str();
  }

 private:
  int dim_;
  TermMap terms_;
};

/// Nonzero homogeneous parts h_j of h in increasing degree; they sum to h.
inline std::vector<std::pair<int, Polynomial>> homogeneous_parts(const Polynomial& h) {
  require(!h.is_zero(), "homogeneous_parts: zero polynomial");
  std::vector<std::pair<int, Polynomial>> parts;
  for (const auto& [m, c] : h.terms()) {
    if (parts.empty() || parts.back().first != m.degree())
      parts.emplace_back(m.degree(), Polynomial(h.dim()));
    parts.back().second.add_term(m, c);
  }
  return parts;
}

/// Flattened polynomial for fast repeated evaluation inside sweeps.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p) : dim_(p.dim()), max_deg_(0) {
    for (const auto& [m, c] : p.terms()) {
      std::array<std::uint8_t, kMaxDim> e{};
      for (int i = 0; i < dim_; ++i) {
        e[i] = static_cast<std::uint8_t>(m[i]);
        max_deg_ = std::max(max_deg_, m[i]);
      }
      exps_.push_back(e);
      coeffs_.push_back(c);
    }
  }

  int max_exponent() const { return max_deg_; }

  double operator()(const Point& x) const {
    std::array<std::array<double, 16>, kMaxDim> pw;
    fill_powers(x, pw);
    return eval(pw);
  }

  template <typename Powers>
  double eval(const Powers& pw) const {
    double s = 0.0;
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
      double v = coeffs_[t];
      for (int i = 0; i < dim_; ++i) v *= pw[i][exps_[t][i]];
      s += v;
    }
    return s;
  }

  template <typename Powers>
  void fill_powers(const Point& x, Powers& pw) const {
    for (int i = 0; i < dim_; ++i) {
      pw[i][0] = 1.0;
      for (int e = 1; e <= max_deg_; ++e) pw[i][e] = pw[i][e - 1] * x[i];
    }
  }

 private:
  int dim_ = 0;
  int max_deg_ = 0;
  std::vector<std::array<std::uint8_t, kMaxDim>> exps_;
  std::vector<double> coeffs_;
};

/// A polynomial with its gradient, compiled for evaluation in inner loops.
class PolynomialField {
 public:
  explicit PolynomialField(const Polynomial& p) : dim_(p.dim()), value_(p) {
    require(p.degree() < 16, "PolynomialField: degree must be below 16");
    for (int i = 0; i < dim_; ++i) grad_[i] = CompiledPolynomial(p.derivative(i));
  }

  int dim() const { return dim_; }

  double value(const Point& x) const { return value_(x); }

  /// Value and gradient in one pass over shared power tables.
  double value_and_gradient(const Point& x, Point& g) const {
    std::array<std::array<double, 16>, kMaxDim> pw;
    value_.fill_powers(x, pw);
    g = Point{};
    for (int i = 0; i < dim_; ++i) g[i] = grad_[i].eval(pw);
    return value_.eval(pw);
  }

 private:
  int dim_;
  CompiledPolynomial value_;
  std::array<CompiledPolynomial, kMaxDim> grad_{};
};

}  // namespace gmtlab
