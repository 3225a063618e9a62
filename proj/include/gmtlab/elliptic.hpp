#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmtlab/error.hpp"
#include "gmtlab/polynomial.hpp"

namespace gmtlab {

/// Constant coefficient matrix A of L_A = -div(A grad) together with its
/// ellipticity constant: <A_s xi, xi> >= |xi|^2 / lambda and |A| <= lambda.
/// Only obtainable through check_ellipticity().
class ConstantEllipticMatrix {
 public:
  const Eigen::MatrixXd& entries() const { return a_; }
  int dim() const { return static_cast<int>(a_.rows()); }
  double lambda() const { return lambda_; }
  double operator()(int i, int j) const { return a_(i, j); }

  static ConstantEllipticMatrix identity(int dim);

 private:
  friend ConstantEllipticMatrix check_ellipticity(const Eigen::MatrixXd& m);
  ConstantEllipticMatrix(Eigen::MatrixXd a, double lambda) : a_(std::move(a)), lambda_(lambda) {}

  Eigen::MatrixXd a_;
  double lambda_;
};

/// Certifies a raw square matrix. The returned constant is the smallest valid
/// one, max(1 / lambda_min(A_s), |A|_op).
inline ConstantEllipticMatrix check_ellipticity(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), "check_ellipticity: matrix must be square");
  require(m.rows() >= 1 && m.rows() <= kMaxDim, "check_ellipticity: dimension must be in [1, 4]");
  require(m.allFinite(), "check_ellipticity: non-finite entry");
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) {
    throw EllipticityError("matrix is not elliptic: smallest eigenvalue of the symmetric part is " +
                           std::to_string(lmin));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double op = svd.singularValues()(0);
  return ConstantEllipticMatrix(m, std::max(1.0 / lmin, op));
}

inline ConstantEllipticMatrix ConstantEllipticMatrix::identity(int dim) {
  return check_ellipticity(Eigen::MatrixXd::Identity(dim, dim));
}

/// A_s = (A + A^T)/2 and its symmetric positive definite square root.
struct SqrtDecomposition {
  Eigen::MatrixXd a_sym;
  Eigen::MatrixXd s;
  Eigen::MatrixXd s_inv;
  double det_s = 1.0;
};

inline SqrtDecomposition symmetrize_sqrt(const ConstantEllipticMatrix& a) {
  SqrtDecomposition d;
  d.a_sym = 0.5 * (a.entries() + a.entries().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.a_sym);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) throw EllipticityError("symmetrize_sqrt: symmetric part is not positive definite");
  const Eigen::MatrixXd& v = es.eigenvectors();
  const Eigen::VectorXd root = ev.array().sqrt();
  d.s = v * root.asDiagonal() * v.transpose();
  d.s = 0.5 * (d.s + d.s.transpose());
  d.s_inv = v * root.cwiseInverse().asDiagonal() * v.transpose();
  d.s_inv = 0.5 * (d.s_inv + d.s_inv.transpose());
  d.det_s = root.prod();
  return d;
}

/// sum_{i,j} a_ij d_i d_j p. Results at rounding level relative to the inputs
/// are dropped, so exact null vectors map to the zero polynomial.
inline Polynomial apply_operator(const ConstantEllipticMatrix& a, const Polynomial& p) {
  if (a.dim() != p.dim()) {
    throw InvalidInput("apply_operator: matrix dimension " + std::to_string(a.dim()) +
                       " does not match polynomial dimension " + std::to_string(p.dim()));
  }
  const int n = p.dim();
  Polynomial out(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const Polynomial di = p.derivative(i);
    for (int j = 0; j < n; ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      const Polynomial dij = di.derivative(j);
      scale = std::max(scale, std::abs(aij) * dij.max_abs_coefficient());
      out += aij * dij;
    }
  }
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * n * n * scale;
  Polynomial clean(n);
  for (const auto& [m, c] : out.terms())
    if (std::abs(c) > noise) clean.add_term(m, c);
  return clean;
}

/// Orthonormal (coefficient inner product) basis of the homogeneous degree-k
/// polynomials annihilated by apply_operator(a, .).
inline std::vector<Polynomial> harmonic_basis(int dim, int k, const ConstantEllipticMatrix& a) {
  require(k >= 1, "harmonic_basis: degree must be at least 1");
  require(k <= kMaxBasisDegree, "harmonic_basis: degree above 8 is not supported");
  require(a.dim() == dim, "harmonic_basis: matrix dimension mismatch");
  const auto cols = monomials_of_degree(dim, k);
  const auto rows = monomials_of_degree(dim, k - 2);
  const int nc = static_cast<int>(cols.size());

  Eigen::MatrixXd basis;
  if (rows.empty()) {
    basis = Eigen::MatrixXd::Identity(nc, nc);
  } else {
    Eigen::MatrixXd symbol = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), nc);
    for (int c = 0; c < nc; ++c) {
      const Polynomial image = apply_operator(a, Polynomial::monomial(cols[c], 1.0));
      for (std::size_t r = 0; r < rows.size(); ++r) symbol(static_cast<Eigen::Index>(r), c) = image.coefficient(rows[r]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(symbol, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cut = 1e-10 * (sv.size() > 0 ? sv(0) : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    basis = svd.matrixV().rightCols(nc - rank);
  }

  std::vector<Polynomial> out;
  for (Eigen::Index b = 0; b < basis.cols(); ++b) {
    Polynomial p(dim);
    for (int c = 0; c < nc; ++c)
      if (std::abs(basis(c, b)) > 1e-15) p.add_term(cols[c], basis(c, b));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace gmtlab
