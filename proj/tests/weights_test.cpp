#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gmtlab/verify/oracles.hpp"
#include "gmtlab/weights.hpp"

using namespace gmtlab;

namespace {

WeightPanel random_panel(std::mt19937_64& rng, int max_cells, double spread) {
  std::uniform_int_distribution<int> nc(1, max_cells);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> z(0.0, spread);
  WeightPanel p;
  p.ball = Ball(Point{}, 1.0);
  const int n = nc(rng);
  for (int i = 0; i < n; ++i) {
    const double m = u(rng);
    p.cells.push_back({m, m * std::exp(z(rng))});
  }
  return p;
}

}  // namespace

TEST(AInf, ConstantDensity) {
  WeightPanel p{{{0.2, 0.6}, {0.5, 1.5}, {0.3, 0.9}}, Ball(Point{}, 1.0)};
  EXPECT_NEAR(a_inf_quantity(p), 1.0, 1e-14);
  EXPECT_NEAR(bmo_oscillation(p), 0.0, 1e-14);
}

TEST(AInf, TwoValuedClosedForms) {
  EXPECT_NEAR(a_inf_quantity(oracle::two_valued_panel(4, 1)), 1.25, 1e-12);
  EXPECT_NEAR(bmo_oscillation(oracle::two_valued_panel(std::exp(2.0), 1)), 1.0, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const auto p = oracle::two_valued_panel(a, b);
    EXPECT_NEAR(a_inf_quantity(p), (a + b) / (2 * std::sqrt(a * b)), 1e-12 * (a + b) / std::sqrt(a * b));
    EXPECT_NEAR(bmo_oscillation(p), std::abs(std::log(a / b)) / 2, 1e-12);
  }
}

TEST(AInf, Errors) {
  WeightPanel p{{{1.0, 1.0}, {1.0, 0.0}}, Ball(Point{}, 1.0)};
  try {
    a_inf_quantity(p);
    FAIL();
  } catch (const LogDivergence& e) {
    EXPECT_NE(std::string(e.what()).find("cell 1"), std::string::npos);
  }
  EXPECT_THROW(bmo_oscillation(p), LogDivergence);
  EXPECT_THROW(a_inf_quantity(WeightPanel{{{0.0, 1.0}}, Ball(Point{}, 1.0)}), InvalidInput);
  EXPECT_THROW(a_inf_quantity(WeightPanel{{{-1.0, 1.0}}, Ball(Point{}, 1.0)}), InvalidInput);
  WeightPanel q{{{1.0, 1.0}, {0.0, 2.0}}, Ball(Point{}, 1.0)};
  EXPECT_EQ(q.ac_violations(), std::vector<std::size_t>{1});
  EXPECT_NEAR(a_inf_quantity(q), 1.0, 1e-14);
}

TEST(AInf, RandomSuiteJensen) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) EXPECT_GE(a_inf_quantity(random_panel(rng, 64, 1.5)), 1.0);
}

TEST(Korey, HoldsOnEqualMassTwoValuedPanels) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(korey_check(oracle::two_valued_panel(std::exp(u(rng)), 1.0)).satisfied);
}

TEST(Korey, FailsForLargeValuesOnMostOfTheMass) {
  // log f = 10 on 90% of the mass, 0 elsewhere: osc = 1.8 > log 2K ~ 1.588.
  WeightPanel p{{{0.9, 0.9 * std::exp(10.0)}, {0.1, 0.1}}, Ball(Point{}, 1.0)};
  const auto c = korey_check(p);
  EXPECT_NEAR(c.osc, 1.8, 1e-12);
  EXPECT_NEAR(c.bound, std::log(2 * (0.9 * std::exp(10.0) + 0.1) * std::exp(-9.0)), 1e-12);
  EXPECT_FALSE(c.satisfied);
}

TEST(AInf, JensenEquality) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto p = random_panel(rng, 16, 1e-8);
    for (auto& c : p.cells) c.nu_mass = 2.5 * c.mu_mass;
    EXPECT_LT(a_inf_quantity(p) - 1.0, 1e-12);
    p.cells[0].nu_mass *= 1.01;
    if (p.cells.size() > 1) EXPECT_GT(a_inf_quantity(p) - 1.0, 1e-12);
  }
}

TEST(AInf, ScaleInvariance) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_panel(rng, 12, 1.0);
    for (double t : {1e-3, 0.5, 7.0}) {
      const auto q = p.nu_scaled(t);
      EXPECT_NEAR(a_inf_quantity(q), a_inf_quantity(p), 1e-10);
      EXPECT_NEAR(bmo_oscillation(q), bmo_oscillation(p), 1e-10);
      EXPECT_NEAR(hru_moduli(q, 0.3).fractional, hru_moduli(p, 0.3).fractional, 1e-12);
    }
  }
}

TEST(Korey, Examples) {
  const auto c = korey_check(oracle::two_valued_panel(3, 3));
  EXPECT_EQ(c.osc, 0.0);
  EXPECT_NEAR(c.bound, std::log(2.0), 1e-14);
  EXPECT_FALSE(c.sqrt_ratio.has_value());
  const auto d = korey_check(oracle::two_valued_panel(4, 1));
  EXPECT_NEAR(d.osc, std::log(2.0), 1e-12);
  EXPECT_NEAR(d.bound, std::log(2.5), 1e-12);
  EXPECT_TRUE(d.satisfied);
  ASSERT_TRUE(d.sqrt_ratio.has_value());
  EXPECT_NEAR(*d.sqrt_ratio, std::log(2.0) / 0.5, 1e-12);
}

TEST(Hru, Examples) {
  WeightPanel flat{{{0.25, 1}, {0.25, 1}, {0.25, 1}, {0.25, 1}}, Ball(Point{}, 1.0)};
  EXPECT_NEAR(hru_moduli(flat, 0.3).fractional, 0.3, 1e-14);
  const auto r = hru_moduli(oracle::two_valued_panel(4, 1), 0.5);
  EXPECT_NEAR(r.fractional, 0.8, 1e-14);
  EXPECT_NEAR(r.integral, 0.8, 1e-14);
  EXPECT_THROW(hru_moduli(flat, 0.0), InvalidInput);
  EXPECT_THROW(hru_moduli(flat, 1.0), InvalidInput);
}

TEST(Hru, MatchesEnumeration) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(0.01, 0.99);
  for (int i = 0; i < 2000; ++i) {
    const auto p = random_panel(rng, 10, 1.2);
    const double delta = d(rng);
    const auto r = hru_moduli(p, delta);
    EXPECT_NEAR(r.fractional, oracle::hru_fractional_enumeration(p, delta), 1e-12);
    EXPECT_NEAR(r.integral, oracle::hru_integral_enumeration(p, delta), 1e-12);
    EXPECT_TRUE(r.integral_exact);
    EXPECT_GE(r.gap(), -1e-12);
  }
}

TEST(Hru, RecipeBound) {
  std::mt19937_64 rng(2);
  double worst_slack = -1e300;
  int tested = 0;
  for (int i = 0; i < 20000 && tested < 2000; ++i) {
    const auto p = random_panel(rng, 32, 0.3);
    const double k = a_inf_quantity(p);
    if (k > 1.1 || k <= 1.0 + 1e-9) continue;
    ++tested;
    const auto rec = hru_recipe(k);
    EXPECT_GT(rec.delta, 0.0);
    EXPECT_LT(rec.delta, rec.alpha);
    const double ratio = hru_moduli(p, rec.delta).fractional;
    worst_slack = std::max(worst_slack, ratio - rec.bound);
  }
  EXPECT_GT(tested, 500);
  RecordProperty("worst_slack", std::to_string(worst_slack));
  EXPECT_LT(worst_slack, 0.0);
}

TEST(Hru, AfincafinBound) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(0.05, 0.5);
  for (int i = 0; i < 2000; ++i) {
    const auto p = random_panel(rng, 24, 0.8);
    const double eta = bmo_oscillation(p) * (1 + 1e-12) + 1e-15;
    const double delta = d(rng);
    const double eps = hru_moduli(p, delta).fractional;
    if (eps >= 1.0) continue;
    EXPECT_LE(a_inf_quantity(p), afincafin_bound(eta, delta, eps)) << i;
  }
}

TEST(VaInf, Profiles) {
  std::vector<WeightPanel> flat, fixed;
  for (double r : {1.0, 0.5, 0.25}) {
    flat.push_back(WeightPanel{{{1, 2}, {3, 6}}, Ball(Point{}, r)});
    fixed.push_back(WeightPanel{{{1, 4}, {1, 1}}, Ball(Point{}, r)});
  }
  const auto a = va_inf_scan(flat);
  EXPECT_TRUE(a.vanishing);
  for (const auto& row : a.rows) EXPECT_NEAR(row.k, 1.0, 1e-14);
  const auto b = va_inf_scan(fixed);
  EXPECT_FALSE(b.vanishing);
  for (const auto& row : b.rows) EXPECT_NEAR(row.k, 1.25, 1e-12);

  std::vector<WeightPanel> shrinking;
  double r = 1.0;
  for (double s : {1.0, 0.3, 0.1, 0.03}) {
    shrinking.push_back(WeightPanel{{{1, 1 + s}, {1, 1 - s / 2}}, Ball(Point{}, r)});
    r /= 2;
  }
  EXPECT_TRUE(va_inf_scan(shrinking).vanishing);
  EXPECT_THROW(va_inf_scan({fixed[2], fixed[0]}), InvalidInput);
}

TEST(WeightsIo, CsvRoundTrip) {
  std::mt19937_64 rng(1);
  const auto p = random_panel(rng, 20, 1.0);
  const auto q = panel_from_csv(panel_to_csv(p));
  ASSERT_EQ(q.cells.size(), p.cells.size());
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    EXPECT_EQ(q.cells[i].mu_mass, p.cells[i].mu_mass);
    EXPECT_EQ(q.cells[i].nu_mass, p.cells[i].nu_mass);
  }
  EXPECT_THROW(panel_from_csv("cell_id,mu_mass,nu_mass\n0,1,x\n"), InvalidInput);
  EXPECT_NE(profile_to_csv(va_inf_scan({p})).find("r,K,osc"), std::string::npos);
}
