#include <gtest/gtest.h>

#include <random>

#include "gmtlab/cone.hpp"
#include "gmtlab/polynomial_parser.hpp"
#include "gmtlab/verify/oracles.hpp"

using namespace gmtlab;

namespace {

const ConstantEllipticMatrix kI2 = ConstantEllipticMatrix::identity(2);

Polynomial P(const char* s) { return parse_polynomial(s, 2); }

ConeOptions quick() {
  ConeOptions o;
  o.starts = 12;
  o.refine = 2;
  o.fine_grid = 400;
  return o;
}

const DiscreteMeasure& xy_sample() {
  static const DiscreteMeasure mu = sample_polymeasure(P("x*y"), kI2, 1.0);
  return mu;
}

}  // namespace

TEST(ConeSpec, Construction) {
  const auto flat = ConeSpec::flat(2);
  EXPECT_EQ(flat.basis.size(), 2u);
  EXPECT_EQ(ConeSpec::homogeneous(2, 3, kI2).basis.size(), 2u);
  EXPECT_EQ(ConeSpec::poly_up_to(2, 3, kI2).basis.size(), 6u);
  EXPECT_EQ(ConeSpec::parse("F2", 2, kI2).name(), "F2");
  EXPECT_EQ(ConeSpec::parse("P3", 3, ConstantEllipticMatrix::identity(3)).basis.size(), 3u + 5u + 7u);
  EXPECT_THROW(ConeSpec::parse("G2", 2, kI2), InvalidInput);
  EXPECT_THROW(ConeSpec::parse("F9", 2, kI2), InvalidInput);
  ConeSpec bad = ConeSpec::homogeneous(2, 2, kI2);
  bad.basis.push_back(P("x^2"));
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(NelderMead, MinimizesQuadratic) {
  auto f = [](const std::vector<double>& x) { return (x[0] - 1) * (x[0] - 1) + 3 * (x[1] + 2) * (x[1] + 2); };
  NelderMeadOptions o;
  o.max_evaluations = 500;
  o.xtol = 1e-8;
  o.ftol = 1e-14;
  const auto r = nelder_mead(f, {0.0, 0.0}, o);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], -2.0, 1e-6);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
}

TEST(NelderMead, SphereCoordinatesRoundTrip) {
  for (const std::vector<double>& v : std::vector<std::vector<double>>{{0.6, -0.8}, {0.2, -0.3, 0.5, 0.78}}) {
    double n = 0;
    for (double x : v) n += x * x;
    const auto p = sphere_point(sphere_angles(v));
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(p[i], v[i] / std::sqrt(n), 1e-12);
  }
}

TEST(ConeDistance, SelfDistanceIsSmall) {
  const auto res = cone_distance(xy_sample(), ConeSpec::homogeneous(2, 2, kI2), 1.0);
  EXPECT_LE(res.value, 0.02);
  EXPECT_EQ(res.restarts, 32);
  EXPECT_NEAR(f_r(sample_polymeasure(res.witness, kI2, 1.0), 1.0), 1.0, 1e-3);
  for (std::size_t i = 1; i < res.trace.size(); ++i) EXPECT_LE(res.trace[i], res.trace[i - 1]);
}

TEST(ConeDistance, FlatMatchesAngleBruteForce) {
  const auto& mu = xy_sample();
  const auto res = cone_distance(mu, ConeSpec::flat(2), 1.0);
  EXPECT_GT(res.value, 0.1);
  // One-parameter sweep over line directions; a unit-density line already has F_1 = 1.
  const auto mun = mu.scaled(1.0 / f_r(mu, 1.0));
  auto at = [&](const DiscreteMeasure& m, double t, int n) {
    const auto line = oracle::line_measure(2, make_point({std::cos(t), std::sin(t)}), 1.0, 1.0, n);
    return f_ball(m, line, Ball(Point{}, 1.0));
  };
  const auto coarse = detail::coarsened_positive(mun, 400);
  double best_t = 0.0, c_best = 1e300;
  for (int i = 0; i < 36; ++i) {
    const double t = std::numbers::pi * i / 36;
    const double v = at(coarse, t, 200);
    if (v < c_best) {
      c_best = v;
      best_t = t;
    }
  }
  // Golden-section search on the full measure around the coarse winner.
  const double g = (std::sqrt(5.0) - 1) / 2, step = std::numbers::pi / 36;
  double lo = best_t - step, hi = best_t + step;
  double t1 = hi - g * (hi - lo), t2 = lo + g * (hi - lo);
  double v1 = at(mun, t1, 800), v2 = at(mun, t2, 800);
  for (int it = 0; it < 8; ++it) {
    if (v1 < v2) {
      hi = t2;
      t2 = t1;
      v2 = v1;
      t1 = hi - g * (hi - lo);
      v1 = at(mun, t1, 800);
    } else {
      lo = t1;
      t1 = t2;
      v1 = v2;
      t2 = lo + g * (hi - lo);
      v2 = at(mun, t2, 800);
    }
  }
  const double best = std::min(v1, v2);
  EXPECT_NEAR(res.value, best, 5e-3) << best_t;
}

TEST(ConeDistance, NeverExceedsOne) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Atom> atoms;
  for (int i = 0; i < 200; ++i) atoms.push_back({make_point({u(rng), u(rng)}), 0.5 + 0.5 * u(rng)});
  const DiscreteMeasure mu(2, atoms);
  for (const auto& cone : {ConeSpec::flat(2), ConeSpec::homogeneous(2, 2, kI2), ConeSpec::poly_up_to(2, 2, kI2)}) {
    const auto res = cone_distance(mu, cone, 1.0, quick());
    EXPECT_LE(res.value, 1.0 + 1e-9) << cone.name();
    EXPECT_GT(res.value, 0.0);
  }
  EXPECT_THROW(cone_distance(DiscreteMeasure(2, {{make_point({3, 0}), 1.0}}), ConeSpec::flat(2), 1.0), InvalidInput);
}

TEST(ConeDistance, ScaleIdentity) {
  const auto mu = sample_polymeasure(P("x*y + 0.5*x^3 - 1.5*x*y^2"), kI2, 1.0);
  const auto cone = ConeSpec::homogeneous(2, 2, kI2);
  for (double r : {0.5, 0.25}) {
    const double direct = cone_distance(mu, cone, r, quick()).value;
    const double blown = cone_distance(translate_dilate(mu, Point{}, r), cone, 1.0, quick()).value;
    EXPECT_NEAR(direct, blown, 1e-3) << r;
  }
}

TEST(ConeDistance, MembershipAcrossScales) {
  const Polynomial h = P("0.3*x^2 - 0.3*y^2 + x*y");
  const auto mu = sample_polymeasure(h, kI2, 2.0, 800);
  for (double r : {0.5, 1.0, 2.0})
    EXPECT_LE(cone_distance(mu, ConeSpec::homogeneous(2, 2, kI2), r, quick()).value, 0.02) << r;
  const auto mu3 = sample_polymeasure(P("x + x*y"), kI2, 2.0, 800);
  for (double r : {0.5, 1.0})
    EXPECT_LE(cone_distance(mu3, ConeSpec::poly_up_to(2, 2, kI2), r).value, 0.02) << r;
}

TEST(ConeDistance, ContinuityUnderJitter) {
  const auto mu = sample_polymeasure(P("x*y"), kI2, 1.0, 400);
  const auto cone = ConeSpec::flat(2);
  const double base = cone_distance(mu, cone, 1.0, quick()).value;
  double prev = 1e300;
  for (double eta : {1e-1, 1e-2, 1e-3}) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-eta, eta);
    std::vector<Atom> atoms = mu.atoms();
    for (auto& a : atoms) a.x = a.x + make_point({u(rng), u(rng)});
    const double d = std::abs(cone_distance(DiscreteMeasure(2, atoms), cone, 1.0, quick()).value - base);
    EXPECT_LT(d, prev) << eta;
    prev = d;
  }
  EXPECT_LT(prev, 2e-3);
}

TEST(ScaleScan, ProfilesAndErrors) {
  const auto line = oracle::line_measure(2, make_point({1, 2}), 2.0, 1.0, 1000);
  for (const auto& row : scale_scan(line, Point{}, ConeSpec::flat(2), {1.0, 0.5, 0.25}, quick()))
    EXPECT_LT(row.d1, 0.01) << row.r;

  const auto self = scale_scan(xy_sample(), Point{}, ConeSpec::homogeneous(2, 2, kI2), {1.0, 0.5, 0.25}, quick());
  for (const auto& row : self) EXPECT_LT(row.d1, 0.03) << row.r;

  const auto tay = sample_polymeasure(P("x*y + x^3 - 3*x*y^2"), kI2, 1.0, 800);
  const auto prof = scale_scan(tay, Point{}, ConeSpec::homogeneous(2, 2, kI2), {1.0, 0.5, 0.25}, quick());
  for (std::size_t i = 1; i < prof.size(); ++i) EXPECT_LT(prof[i].d1, prof[i - 1].d1);

  EXPECT_THROW(scale_scan(line, make_point({5, 5}), ConeSpec::flat(2), {1.0}), InvalidInput);
}

TEST(DetectDegree, Examples) {
  const std::vector<double> radii = {1.0, 0.5};
  const auto a = detect_degree(xy_sample(), Point{}, 2, radii, kI2, quick());
  ASSERT_TRUE(a.k.has_value());
  EXPECT_EQ(*a.k, 2);
  const auto line = oracle::line_measure(2, make_point({1, -1}), 2.0, 1.0, 1000);
  const auto b = detect_degree(line, Point{}, 2, radii, kI2, quick());
  ASSERT_TRUE(b.k.has_value());
  EXPECT_EQ(*b.k, 1);
  // Lowest homogeneous part decides once the scale is small.
  const auto tay = sample_polymeasure(P("x*y + x^3 - 3*x*y^2"), kI2, 1.0 / 16, 800);
  const auto c = detect_degree(tay, Point{}, 2, {1.0 / 32, 1.0 / 64}, kI2, quick());
  ASSERT_TRUE(c.k.has_value());
  EXPECT_EQ(*c.k, 2);
  // A cubic against degrees 1..2 only: none qualifies.
  const auto cub = sample_polymeasure(P("x^3 - 3*x*y^2"), kI2, 1.0, 400);
  const auto d = detect_degree(cub, Point{}, 2, {1.0, 0.5}, kI2, quick());
  EXPECT_FALSE(d.k.has_value());
  EXPECT_EQ(d.table.size(), 4u);
}

TEST(FlatnessTheta, Examples) {
  std::vector<Point> yaxis, axes;
  for (int i = -2000; i <= 2000; ++i) {
    const double t = i / 1000.0;
    yaxis.push_back(make_point({0, t}));
    axes.push_back(make_point({0, t}));
    axes.push_back(make_point({t, 0}));
  }
  EXPECT_LT(flatness_theta(yaxis, Point{}, 1.0, {P("x")}), 0.02);
  for (double th : {0.05, 0.1, 0.2}) {
    const Polynomial line = std::cos(th) * P("x") - std::sin(th) * P("y");
    EXPECT_NEAR(flatness_theta(yaxis, Point{}, 1.0, {line}), std::sin(th), 0.01) << th;
  }
  std::vector<Polynomial> lines;
  double brute = 1e300;
  for (int i = 0; i < 36; ++i) {
    const double th = std::numbers::pi * i / 36;
    lines.push_back(std::cos(th) * P("x") - std::sin(th) * P("y"));
    // Farther axis from the line at angle th: max(|sin|, |cos|).
    brute = std::min(brute, std::max(std::abs(std::sin(th)), std::abs(std::cos(th))));
  }
  EXPECT_NEAR(flatness_theta(axes, Point{}, 1.0, lines), brute, 0.01);
  EXPECT_THROW(flatness_theta(yaxis, make_point({5, 0}), 1.0, {P("x")}), InvalidInput);
}

TEST(GrowthExponent, PositiveForConeMembers) {
  const double beta = growth_exponent(xy_sample(), Point{}, {0.8, 0.4, 0.2, 0.1});
  EXPECT_NEAR(beta, 2.0, 0.05);
}
