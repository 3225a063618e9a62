#include <gtest/gtest.h>

#include <random>

#include "gmtlab/polymeasure.hpp"
#include "gmtlab/polynomial_parser.hpp"

using namespace gmtlab;

namespace {

const ConstantEllipticMatrix kI2 = ConstantEllipticMatrix::identity(2);

ConstantEllipticMatrix diag41() {
  Eigen::MatrixXd a(2, 2);
  a << 4, 0, 0, 1;
  return check_ellipticity(a);
}

Polynomial P(const char* s) { return parse_polynomial(s, 2); }

}  // namespace

TEST(SamplePolymeasure, LineMeasure) {
  const auto mu = sample_polymeasure(P("x"), kI2, 1.0);
  EXPECT_NEAR(ball_mass(mu, Ball(Point{}, 1.0)), 2.0, 0.02);
  EXPECT_NEAR(f_r(mu, 1.0), 1.0, 0.01);
  for (const auto& a : mu.atoms()) EXPECT_LT(std::abs(a.x[0]), 1e-12);
}

TEST(SamplePolymeasure, EllipticDensity) {
  const auto mu = sample_polymeasure(P("x"), diag41(), 1.0);
  EXPECT_NEAR(ball_mass(mu, Ball(Point{}, 1.0)), 8.0, 0.08);
}

TEST(SamplePolymeasure, CrossClosedForms) {
  PolyMeasureSpec spec;
  spec.h = P("x*y");
  const auto s = sample_polymeasure(spec);
  EXPECT_NEAR(f_r(s.measure, 1.0), 2.0 / 3.0, 2.0 / 300.0);
  for (double r : {0.25, 0.5, 1.0}) EXPECT_NEAR(ball_mass(s.measure, Ball(Point{}, r)), 2 * r * r, 0.02 * 2 * r * r);
  EXPECT_EQ(s.diagnostics.newton_failures, 0u);
  for (const auto& a : s.measure.atoms()) {
    EXPECT_GT(a.w, 0.0);
    EXPECT_LT(std::abs(a.x[0] * a.x[1]), 1e-10);
  }
}

TEST(SamplePolymeasure, HomogeneityOfBallMass) {
  // Degree 3 in the plane: mass of B(0, r) grows like r^3.
  const Polynomial h = P("x^3 - 3*x*y^2");
  const double m1 = ball_mass(sample_polymeasure(h, kI2, 1.0), Ball(Point{}, 1.0));
  for (double r : {0.25, 0.5, 2.0, 4.0}) {
    const double mr = ball_mass(sample_polymeasure(h, kI2, r), Ball(Point{}, r));
    EXPECT_NEAR(mr / m1, std::pow(r, 3), 0.02 * std::pow(r, 3)) << r;
  }
}

TEST(SamplePolymeasure, ThreeDimensionalPlane) {
  const auto mu = sample_polymeasure(parse_polynomial("z", 3), ConstantEllipticMatrix::identity(3), 1.0);
  EXPECT_NEAR(ball_mass(mu, Ball(Point{}, 1.0)), std::numbers::pi, 0.03 * std::numbers::pi);
}

TEST(SamplePolymeasure, Errors) {
  EXPECT_THROW(sample_polymeasure(Polynomial::constant(2, 1.0), kI2, 1.0), InvalidInput);
  EXPECT_THROW(sample_polymeasure(P("x"), ConstantEllipticMatrix::identity(3), 1.0), InvalidInput);
  PolyMeasureSpec spec;
  spec.h = P("x");
  spec.shell_eps = 1e-4;
  spec.grid_n = 100;
  EXPECT_THROW(sample_polymeasure(spec), InvalidInput);
}

TEST(SamplePolymeasure, ExplicitShellRefinesGrid) {
  PolyMeasureSpec spec;
  spec.h = P("x*y");
  spec.shell_eps = 1e-3;
  const auto s = sample_polymeasure(spec);
  EXPECT_LE(s.diagnostics.grid_step * 2.0 * s.diagnostics.max_gradient, 1e-3 * (1 + 1e-12));
  EXPECT_NEAR(f_r(s.measure, 1.0), 2.0 / 3.0, 2.0 / 300.0);
}

TEST(SamplePolymeasure, DeterministicAcrossWorkerCounts) {
  set_worker_count(1);
  const auto a = sample_polymeasure(P("x*y + x^3 - 3*x*y^2"), kI2, 1.0, 300);
  set_worker_count(3);
  const auto b = sample_polymeasure(P("x*y + x^3 - 3*x*y^2"), kI2, 1.0, 300);
  set_worker_count(0);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.atoms()[i].x, b.atoms()[i].x);
    EXPECT_EQ(a.atoms()[i].w, b.atoms()[i].w);
  }
}

TEST(WeakPairing, Examples) {
  const auto bump = TestFunction::bump(2, Point{}, 1.0, 2);
  EXPECT_NEAR(weak_pairing(P("x"), kI2, bump), 16.0 / 15.0, 0.005 * 16.0 / 15.0);
  const auto away = TestFunction::bump(2, make_point({-2, 0}), 1.0, 2);
  EXPECT_EQ(weak_pairing(P("x"), kI2, away), 0.0);
  TestFunction bad = bump;
  bad.power = 1;
  EXPECT_THROW(weak_pairing(P("x"), kI2, bad), InvalidInput);
}

TEST(WeakPairing, AgreesWithSurfaceSamples) {
  std::vector<TestFunction> suite = {
      TestFunction::bump(2, Point{}, 1.0, 2),
      TestFunction::bump(2, make_point({0.2, -0.1}), 0.7, 3),
      TestFunction::bump(2, make_point({0.3, 0.3}), 0.5, 4),
  };
  TestFunction tilted = TestFunction::bump(2, make_point({-0.1, 0.2}), 0.8, 3);
  tilted.q = P("1 + x + 0.5*y^2");
  suite.push_back(tilted);
  for (const auto& a : {kI2, diag41()}) {
    // h = g o S^{-1} is L_A-harmonic when g is harmonic.
    const Eigen::MatrixXd s_inv = symmetrize_sqrt(a).s_inv;
    for (const char* hs : {"x", "x*y", "x^3 - 3*x*y^2", "x*y + x^3 - 3*x*y^2"}) {
      const Polynomial h = P(hs).composed(s_inv);
      ASSERT_TRUE(apply_operator(a, h).is_zero());
      const auto mu = sample_polymeasure(h, a, 1.0);
      const double scale = f_r(mu, 1.0);
      for (const auto& phi : suite) {
        const double weak = weak_pairing(h, a, phi);
        const double surf = pair_measure(mu, phi);
        EXPECT_LE(std::abs(weak - surf), 0.02 * std::max(std::abs(weak), scale)) << hs << " " << weak << " " << surf;
      }
    }
  }
}

TEST(LinearPushforward, Basics) {
  const auto mu = sample_polymeasure(P("x*y"), kI2, 1.0, 100);
  const auto id = linear_pushforward(mu, Eigen::Matrix2d::Identity(), 1.0);
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_EQ(id.atoms()[i].x, mu.atoms()[i].x);
  const double r = 0.37;
  const auto a = linear_pushforward(mu, Eigen::Matrix2d::Identity() / r, 1.0);
  const auto b = translate_dilate(mu, Point{}, r);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    EXPECT_NEAR(a.atoms()[i].x[0], b.atoms()[i].x[0], 1e-15);
    EXPECT_NEAR(a.atoms()[i].x[1], b.atoms()[i].x[1], 1e-15);
  }
  EXPECT_THROW(linear_pushforward(mu, Eigen::Matrix2d::Zero(), 1.0), InvalidInput);
  EXPECT_THROW(linear_pushforward(mu, Eigen::Matrix2d::Identity(), 0.0), InvalidInput);
}

TEST(LinearPushforward, EllipticChangeOfVariables) {
  const auto A = diag41();
  const auto sq = symmetrize_sqrt(A);
  const Polynomial h = P("x");
  const auto lhs = sample_polymeasure(h.composed(sq.s), kI2, 1.0);
  // S^{-1} maps B(0, 1) into B(0, 1) only if |S| >= 1; sample a larger ball.
  const auto raw = sample_polymeasure(h, A, 2.0);
  const auto rhs = linear_pushforward(raw, sq.s_inv, 1.0 / sq.det_s);
  const double scale = f_r(lhs, 1.0);
  EXPECT_LE(f_ball(lhs, rhs, Ball(Point{}, 1.0)), 0.02 * scale);
}

TEST(ScalingReport, RadiusLaw) {
  const auto rep = scaling_report(P("x*y"), kI2, {0.5, 1.0, 2.0});
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& row : rep.rows) EXPECT_LE(row.rel_err, 0.01) << row.r;
  EXPECT_NEAR(rep.rows[1].measured, 1.0, 1e-12);
  for (const auto& d : rep.dilation) EXPECT_LE(d.discrepancy, 0.02 * d.scale);
  ScalingOptions only;
  only.dilation_law = false;
  const auto lin = scaling_report(P("x"), kI2, {2.0}, only);
  EXPECT_NEAR(lin.rows[0].measured, 4.0, 0.04);
  try {
    scaling_report(P("x + x^2"), kI2, {2.0});
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("1 2"), std::string::npos);
  }
  ScalingOptions dil;
  dil.radius_law = false;
  const auto nh = scaling_report(P("x*y + x^3"), kI2, {0.5}, dil);
  EXPECT_LE(nh.dilation[0].discrepancy, 0.02 * nh.dilation[0].scale);
}

TEST(PolymeasureProperties, SupNormEnvelopeAndComparability) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  double envelope = 0.0, band_lo = 1e300, band_hi = 0.0;
  auto sup_on_ball = [](const Polynomial& h, double r) {
    const int n = 200;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Point x = make_point({-r + (i + 0.5) * 2 * r / n, -r + (j + 0.5) * 2 * r / n});
        if (norm(x) < r) s = std::max(s, std::abs(h(x)));
      }
    return s;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + trial % 2;
    Polynomial h(2);
    for (int d = 1; d <= k; ++d) {
      const auto basis = harmonic_basis(2, d, kI2);
      for (const auto& b : basis) h += g(rng) * b;
    }
    const double f1 = f_r(sample_polymeasure(h, kI2, 1.0, 200), 1.0);
    ASSERT_GT(f1, 0.0);
    envelope = std::max(envelope, sup_on_ball(h, 1.0) / f1);
    if (trial < 10) {
      for (double r : {0.5, 1.0, 2.0}) {
        const double fr = f_r(sample_polymeasure(h, kI2, r, 200), r);
        const double ratio = sup_on_ball(h, r) / (fr / r);
        band_lo = std::min(band_lo, ratio);
        band_hi = std::max(band_hi, ratio);
      }
    }
  }
  EXPECT_TRUE(std::isfinite(envelope));
  RecordProperty("sup_norm_envelope", std::to_string(envelope));
  RecordProperty("comparability_band", std::to_string(band_lo) + "," + std::to_string(band_hi));
  EXPECT_GT(band_lo, 0.0);
  EXPECT_TRUE(std::isfinite(band_hi));
}

TEST(PolymeasureProperties, WeakContinuity) {
  const Polynomial h = P("x*y");
  const auto target = sample_polymeasure(h, kI2, 1.0, 400);
  double prev = 1e300, first = 0.0;
  for (double t : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    const auto mu = sample_polymeasure(h + t * P("x + y^3"), kI2, 1.0, 400);
    const double d = f_ball(mu, target, Ball(Point{}, 1.0));
    EXPECT_LT(d, prev) << t;
    if (first == 0.0) first = d;
    prev = d;
  }
  EXPECT_LT(prev, 0.15 * first);
}
