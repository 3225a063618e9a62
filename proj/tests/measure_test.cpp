#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "gmtlab/bounded_lipschitz.hpp"
#include "gmtlab/io.hpp"
#include "gmtlab/measure.hpp"
#include "gmtlab/verify/oracles.hpp"

using namespace gmtlab;

namespace {

DiscreteMeasure delta(const Point& x, double w = 1.0, int dim = 2) { return DiscreteMeasure(dim, {{x, w}}); }

DiscreteMeasure random_measure(std::mt19937_64& rng, int atoms, double spread = 1.0) {
  std::uniform_real_distribution<double> u(-spread, spread), w(0.05, 1.0);
  std::vector<Atom> out;
  for (int i = 0; i < atoms; ++i) out.push_back({make_point({u(rng), u(rng)}), w(rng)});
  return DiscreteMeasure(2, std::move(out));
}

// Discretized omega_xy: density |t| on both axes, midpoint atoms.
DiscreteMeasure axes_measure(int n_per_half, double R) {
  std::vector<Atom> atoms;
  const double h = R / n_per_half;
  for (int i = 0; i < n_per_half; ++i) {
    const double t = (i + 0.5) * h;
    for (double s : {-1.0, 1.0}) {
      atoms.push_back({make_point({s * t, 0.0}), t * h});
      atoms.push_back({make_point({0.0, s * t}), t * h});
    }
  }
  return DiscreteMeasure(2, std::move(atoms));
}

}  // namespace

TEST(Measure, TranslateDilateExamples) {
  const auto mu = delta(make_point({3, 0}), 2.0);
  const auto id = translate_dilate(mu, Point{}, 1.0);
  EXPECT_EQ(id.atoms()[0].x, mu.atoms()[0].x);
  const auto t = translate_dilate(mu, make_point({1, 0}), 2.0);
  EXPECT_DOUBLE_EQ(t.atoms()[0].x[0], 1.0);
  EXPECT_DOUBLE_EQ(t.atoms()[0].w, 2.0);
  EXPECT_THROW(translate_dilate(mu, Point{}, 0.0), InvalidInput);
  EXPECT_THROW(translate_dilate(mu, Point{}, -1.0), InvalidInput);
}

TEST(Measure, TranslateDilateBallIdentity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto mu = random_measure(rng, 30);
    const Point xi = make_point({u(rng), u(rng)});
    const double r = 0.1 + std::abs(u(rng)), s = 0.1 + std::abs(u(rng));
    EXPECT_NEAR(ball_mass(translate_dilate(mu, xi, r), Ball(Point{}, s)), ball_mass(mu, Ball(xi, s * r)), 1e-12);
  }
}

TEST(Measure, FrExamples) {
  EXPECT_DOUBLE_EQ(f_r(delta(Point{}, 3.0), 2.0), 6.0);
  EXPECT_DOUBLE_EQ(f_r(delta(make_point({2, 0})), 1.0), 0.0);
  // Closed form 4 int_0^1 (1 - t) t dt = 2/3.
  EXPECT_NEAR(f_r(axes_measure(4000, 1.0), 1.0), 2.0 / 3.0, 1e-6);
  EXPECT_THROW(f_r(delta(Point{}), 0.0), InvalidInput);
}

TEST(Measure, BallMassExamples) {
  EXPECT_DOUBLE_EQ(ball_mass(delta(Point{}, 2.5), Ball(Point{}, 1.0)), 2.5);
  EXPECT_DOUBLE_EQ(ball_mass(delta(make_point({1, 0})), Ball(Point{}, 1.0)), 0.0);
  const auto axes = axes_measure(4000, 1.0);
  for (double r : {0.25, 0.5, 1.0}) EXPECT_NEAR(ball_mass(axes, Ball(Point{}, r)), 2 * r * r, 2e-3 * r);
}

TEST(Measure, DoublingProfile) {
  const auto d = doubling_profile(delta(Point{}), Point{}, {1.0, 0.5, 0.1});
  for (const auto& v : d) EXPECT_DOUBLE_EQ(*v, 1.0);
  const auto axes = doubling_profile(axes_measure(4000, 2.0), Point{}, {0.5, 0.25, 0.125});
  for (const auto& v : axes) EXPECT_NEAR(*v, 4.0, 0.02);
  // Lebesgue sample: uniform grid on [-1, 1]^2.
  std::vector<Atom> leb;
  const int n = 400;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) leb.push_back({make_point({-1 + (i + .5) * 2.0 / n, -1 + (j + .5) * 2.0 / n}), 1.0});
  for (const auto& v : doubling_profile(DiscreteMeasure(2, leb), make_point({0.1, -0.05}), {0.3, 0.2, 0.1}))
    EXPECT_NEAR(*v, 4.0, 0.05);
  const auto undefined = doubling_profile(delta(make_point({5, 5})), Point{}, {1.0});
  EXPECT_FALSE(undefined[0].has_value());
}

TEST(Measure, DimensionSlope) {
  EXPECT_NEAR(dimension_slope(axes_measure(4000, 1.0), Point{}, {1.0, 0.5, 0.25, 0.125}), 2.0, 0.01);
  std::vector<Atom> line;
  for (int i = 0; i < 20000; ++i) line.push_back({make_point({-1 + (i + 0.5) / 10000.0, 0.0}), 1e-4});
  EXPECT_NEAR(dimension_slope(DiscreteMeasure(2, line), Point{}, {0.5, 0.25, 0.125, 0.0625}), 1.0, 0.01);
  try {
    dimension_slope(delta(make_point({0.9, 0})), Point{}, {1.0, 0.5, 0.25});
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos);
  }
  EXPECT_THROW(dimension_slope(delta(Point{}), Point{}, {1.0, 0.5}), InvalidInput);
}

TEST(FBall, Examples) {
  const auto mu = delta(Point{});
  const DiscreteMeasure zero(2);
  EXPECT_NEAR(f_ball(mu, mu, Ball(Point{}, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(f_ball(mu, zero, Ball(Point{}, 1.0)), 1.0, 1e-15);
  EXPECT_NEAR(f_ball(mu, delta(make_point({0.5, 0})), Ball(Point{}, 1.0)), 0.5, 1e-15);
  EXPECT_NEAR(oracle::brute_force_f_ball(mu, delta(make_point({0.5, 0})), Ball(Point{}, 1.0)), 0.5, 1e-6);
  EXPECT_THROW(f_ball(mu, DiscreteMeasure(3), Ball(Point{}, 1.0)), InvalidInput);
}

TEST(FBall, MatchesBruteForceOnSmallInstances) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> na(0, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const int a = 1 + na(rng);
    const int b = std::min(5 - a, na(rng));
    const auto mu = random_measure(rng, a, 1.2);
    const auto sigma = random_measure(rng, b, 1.2);
    const Ball ball(Point{}, 1.0);
    const auto lp = f_ball_detailed(mu, sigma, ball);
    const double bf = oracle::brute_force_f_ball(mu, sigma, ball);
    ASSERT_TRUE(std::isfinite(bf));
    EXPECT_NEAR(lp.value, bf, 1e-9) << "trial " << trial;
        EXPECT_LE(lp.duality_gap, 1e-9);
  }
}

TEST(FBall, AgreesWithFrWhenSigmaIsZero) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = random_measure(rng, 40, 0.7);
    for (double r : {0.5, 1.0, 2.0})
      EXPECT_NEAR(f_ball(mu, DiscreteMeasure(2), Ball(Point{}, r)), f_r(mu, r), 1e-10);
  }
}

TEST(FBall, ScalingIdentities) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = random_measure(rng, 25, 1.5);
    const auto nu = random_measure(rng, 25, 1.5);
    const Point xi = make_point({0.3 * u(rng), 0.3 * u(rng)});
    const double r = 0.5 + std::abs(u(rng));
    // F_{B(xi,r)}(mu) = r F_1(T[mu]).
    EXPECT_NEAR(f_ball_mass(mu, Ball(xi, r)), r * f_r(translate_dilate(mu, xi, r), 1.0), 1e-12);
    const double lhs = f_ball(mu, nu, Ball(xi, r));
    const double rhs = r * f_ball(translate_dilate(mu, xi, r), translate_dilate(nu, xi, r), Ball(Point{}, 1.0));
    EXPECT_NEAR(lhs, rhs, 1e-8);
  }
}

TEST(FBall, PseudometricProperties) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> na(1, 10);
  const Ball ball(Point{}, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_measure(rng, na(rng)), b = random_measure(rng, na(rng)), c = random_measure(rng, na(rng));
    const double ab = f_ball(a, b, ball), ba = f_ball(b, a, ball);
    EXPECT_NEAR(ab, ba, 1e-10);
    EXPECT_GE(ab, -1e-12);
    EXPECT_LE(ab, f_ball(a, c, ball) + f_ball(c, b, ball) + 1e-8);
  }
}

TEST(FBall, MonotonicityAndPositivity) {
  std::mt19937_64 rng(8);
  const auto mu = random_measure(rng, 50);
  double prev = 0.0;
  for (double r = 0.1; r < 3.0; r += 0.1) {
    const double v = f_r(mu, r);
    EXPECT_GE(v, prev);
    prev = v;
  }
  // sigma <= mu atomwise.
  std::vector<Atom> half = mu.atoms();
  for (auto& a : half) a.w *= 0.4;
  EXPECT_GE(f_ball(mu, DiscreteMeasure(2, half), Ball(Point{}, 1.0)), 0.0);
}

TEST(FBall, CoarseningBoundsTheError) {
  std::mt19937_64 rng(3);
  const auto mu = random_measure(rng, 3000, 1.0), nu = random_measure(rng, 3000, 1.0);
  const Ball ball(Point{}, 1.0);
  const auto exact = f_ball_detailed(mu, nu, ball);
  FBallOptions opt;
  opt.coarsen_above = 1000;
  opt.coarsen_to = 500;
  const auto coarse = f_ball_detailed(mu, nu, ball, opt);
  EXPECT_LE(coarse.support_points, 500u);
  EXPECT_GT(coarse.coarsening_error, 0.0);
  EXPECT_LE(std::abs(coarse.value - exact.value), coarse.coarsening_error + 1e-9);
}

TEST(MeasureIo, CsvAndBinaryRoundTripBitExactly) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int dim = 1; dim <= 4; ++dim) {
    std::vector<Atom> atoms;
    for (int i = 0; i < 50; ++i) {
      Atom a;
      for (int k = 0; k < dim; ++k) a.x[k] = u(rng) / 7.0;
      a.w = std::abs(u(rng)) * 1e-5;
      atoms.push_back(a);
    }
    const DiscreteMeasure mu(dim, atoms);
    const auto back = measure_from_csv(measure_to_csv(mu));
    std::stringstream bin;
    write_measure_binary(bin, mu);
    const auto back2 = read_measure_binary(bin);
    ASSERT_EQ(back.dim(), dim);
    ASSERT_EQ(back.size(), mu.size());
    ASSERT_EQ(back2.size(), mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      EXPECT_EQ(back.atoms()[i].x, mu.atoms()[i].x);
      EXPECT_EQ(back.atoms()[i].w, mu.atoms()[i].w);
      EXPECT_EQ(back2.atoms()[i].x, mu.atoms()[i].x);
      EXPECT_EQ(back2.atoms()[i].w, mu.atoms()[i].w);
    }
  }
  EXPECT_THROW(measure_from_csv("x,y,weight\n1,2\n"), InvalidInput);
  EXPECT_THROW(measure_from_csv("1,2,-1\n"), InvalidInput);
}
