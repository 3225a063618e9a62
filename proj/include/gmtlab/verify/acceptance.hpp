#pragma once

// Acceptance suite: one check per quantitative claim, each with a fixed
// tolerance and time budget. Checks record their artifacts as strings so that
// runs can be compared byte for byte.

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gmtlab/bounded_lipschitz.hpp"
#include "gmtlab/cone.hpp"
#include "gmtlab/io.hpp"
#include "gmtlab/polymeasure.hpp"
#include "gmtlab/polynomial_parser.hpp"
#include "gmtlab/stochastic.hpp"
#include "gmtlab/verify/oracles.hpp"
#include "gmtlab/weights.hpp"

namespace gmtlab::verify {

struct SuiteOptions {
  std::uint64_t seed = 1;
};

struct CheckResult {
  std::string id;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  /// name -> file content
  std::map<std::string, std::string> artifacts;
};

struct CheckInfo {
  int number = 0;
  std::string id;
  std::string anchor;
  std::string tolerance;
  double budget_seconds = 0.0;
  std::function<CheckResult(const SuiteOptions&)> run;
};

namespace detail {

inline Polynomial poly(const char* s) { return parse_polynomial(s, 2); }

inline const ConstantEllipticMatrix& id2() {
  static const ConstantEllipticMatrix a = ConstantEllipticMatrix::identity(2);
  return a;
}

inline ConstantEllipticMatrix diag41() {
  Eigen::MatrixXd a(2, 2);
  a << 4, 0, 0, 1;
  return check_ellipticity(a);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

inline WalkConfig walks(std::uint64_t n, std::uint64_t seed) {
  WalkConfig c;
  c.n_walks = n;
  c.seed = seed;
  return c;
}

inline std::string rows_csv(const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os << header << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << '\n';
  }
  return os.str();
}

// --- individual checks --------------------------------------------------

inline CheckResult scaling_law(const SuiteOptions&) {
  CheckResult res;
  ScalingOptions opt;
  opt.dilation_law = false;
  const auto rep = scaling_report(poly("x*y"), id2(), {0.5, 2.0}, opt);
  bool ok = true;
  std::vector<std::vector<double>> rows;
  std::ostringstream d;
  for (const auto& row : rep.rows) {
    const double q = row.measured / row.predicted;
    ok = ok && q >= 0.99 && q <= 1.01;
    d << "r=" << row.r << " ratio/r^3=" << fmt(q) << " ";
    rows.push_back({row.r, row.measured, row.predicted});
  }
  res.passed = ok;
  res.detail = d.str();
  res.artifacts["scaling.csv"] = rows_csv("r,measured,predicted", rows);
  return res;
}

inline CheckResult closed_form_mass(const SuiteOptions&) {
  CheckResult res;
  const auto mu = sample_polymeasure(poly("x*y"), id2(), 1.0);
  const double f1 = f_r(mu, 1.0);
  bool ok = std::abs(f1 / (2.0 / 3.0) - 1.0) <= 0.01;
  std::ostringstream d;
  d << "F1=" << fmt(f1);
  for (double r : {0.25, 0.5, 1.0}) {
    const double m = ball_mass(mu, Ball(Point{}, r));
    ok = ok && std::abs(m / (2 * r * r) - 1.0) <= 0.02;
    d << " m(" << r << ")/2r^2=" << fmt(m / (2 * r * r));
  }
  res.passed = ok;
  res.detail = d.str();
  res.artifacts["omega_xy.csv"] = measure_to_csv(mu);
  return res;
}

inline CheckResult weak_form(const SuiteOptions&) {
  CheckResult res;
  const double v = weak_pairing(poly("x"), id2(), TestFunction::bump(2, Point{}, 1.0, 2));
  bool ok = std::abs(v / (16.0 / 15.0) - 1.0) <= 0.005;
  std::vector<TestFunction> suite = {TestFunction::bump(2, Point{}, 1.0, 2),
                                     TestFunction::bump(2, make_point({0.2, -0.1}), 0.7, 3),
                                     TestFunction::bump(2, make_point({0.3, 0.3}), 0.5, 4)};
  double worst = 0.0;
  for (const char* hs : {"x", "x*y", "x^3 - 3*x*y^2"}) {
    const Polynomial h = poly(hs);
    const auto mu = sample_polymeasure(h, id2(), 1.0);
    const double scale = f_r(mu, 1.0);
    for (const auto& phi : suite) {
      const double weak = weak_pairing(h, id2(), phi);
      const double surf = pair_measure(mu, phi);
      worst = std::max(worst, std::abs(weak - surf) / std::max(std::abs(weak), scale));
    }
  }
  ok = ok && worst <= 0.02;
  res.passed = ok;
  res.detail = "pairing(x, bump)=" + fmt(v) + " (16/15=" + fmt(16.0 / 15) + "), worst surface/weak rel. gap " + fmt(worst);
  return res;
}

inline CheckResult pushforward(const SuiteOptions&) {
  CheckResult res;
  const auto a = diag41();
  const auto sq = symmetrize_sqrt(a);
  const Polynomial h = poly("x");
  const auto lhs = sample_polymeasure(h.composed(sq.s), id2(), 1.0);
  const auto rhs = linear_pushforward(sample_polymeasure(h, a, 2.0), sq.s_inv, 1.0 / sq.det_s);
  const double scale = f_r(lhs, 1.0);
  const double disc = f_ball(lhs, rhs, Ball(Point{}, 1.0));
  res.passed = disc <= 0.02 * scale;
  res.detail = "F_B discrepancy " + fmt(disc) + " vs 2% of F_1 = " + fmt(0.02 * scale);
  return res;
}

inline CheckResult lp_oracle(const SuiteOptions& o) {
  CheckResult res;
  std::mt19937_64 rng(mix64(o.seed ^ 5));
  std::uniform_real_distribution<double> u(-1.2, 1.2), w(0.1, 1.0);
  std::uniform_int_distribution<int> na(1, 3);
  double worst = 0.0, worst_fr = 0.0;
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < 20; ++t) {
    std::vector<Atom> a, b;
    const int n1 = na(rng), n2 = std::min(5 - n1, na(rng));
    for (int i = 0; i < n1; ++i) a.push_back({make_point({u(rng), u(rng)}), w(rng)});
    for (int i = 0; i < n2; ++i) b.push_back({make_point({u(rng), u(rng)}), w(rng)});
    const DiscreteMeasure mu(2, a), sigma(2, b);
    const Ball ball(make_point({0.1 * u(rng), 0.1 * u(rng)}), 0.5 + std::abs(u(rng)));
    const double lp = f_ball(mu, sigma, ball);
    const double bf = oracle::brute_force_f_ball(mu, sigma, ball);
    worst = std::max(worst, std::abs(lp - bf));
    rows.push_back({static_cast<double>(t), lp, bf});
    for (double r : {0.5, 1.0, 2.0})
      worst_fr = std::max(worst_fr, std::abs(f_ball(mu, DiscreteMeasure(2), Ball(Point{}, r)) - f_r(mu, r)));
  }
  res.passed = worst <= 1e-3 && worst_fr <= 1e-10;
  res.detail = "max |LP - enumeration| = " + fmt(worst) + ", max |F_B(mu,0) - F_r| = " + fmt(worst_fr);
  res.artifacts["lp_oracle.csv"] = rows_csv("instance,lp,enumeration", rows);
  return res;
}

inline CheckResult taylor_blowup(const SuiteOptions&) {
  CheckResult res;
  const auto mu = sample_polymeasure(poly("x*y + x^3 - 3*x*y^2"), id2(), 1.0, 1600);
  const auto prof = scale_scan(mu, Point{}, ConeSpec::homogeneous(2, 2, id2()), {1.0, 0.5, 0.25, 0.125});
  bool dec = true;
  std::ostringstream d;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    if (i > 0) dec = dec && prof[i].d1 < prof[i - 1].d1;
    d << "d1(" << prof[i].r << ")=" << fmt(prof[i].d1) << " ";
    rows.push_back({prof[i].r, prof[i].d1});
  }
  const bool small = prof.back().d1 < 0.05;
  res.passed = dec && small;
  d << (dec ? "decreasing" : "NOT decreasing") << "; at r=1/8 " << (small ? "< 0.05" : ">= 0.05");
  res.detail = d.str();
  res.artifacts["taylor_scan.csv"] = rows_csv("r,d1", rows);
  return res;
}

inline CheckResult degree_detection(const SuiteOptions&) {
  CheckResult res;
  const auto mu = sample_polymeasure(poly("x*y"), id2(), 1.0);
  ConeOptions quick;
  quick.starts = 12;
  quick.refine = 2;
  quick.fine_grid = 400;
  const std::vector<double> radii = {1.0, 0.5};
  const auto a = detect_degree(mu, Point{}, 3, radii, id2(), quick);
  const auto line = oracle::line_measure(2, make_point({1, -1}), 2.0, 1.0, 1000);
  const auto b = detect_degree(line, Point{}, 3, radii, id2(), quick);

  const auto flat = cone_distance(mu, ConeSpec::flat(2), 1.0);
  const auto mun = mu.scaled(1.0 / f_r(mu, 1.0));
  auto at = [&](const DiscreteMeasure& m, double t, int n) {
    return f_ball(m, oracle::line_measure(2, make_point({std::cos(t), std::sin(t)}), 1.0, 1.0, n), Ball(Point{}, 1.0));
  };
  const auto coarse = gmtlab::detail::coarsened_positive(mun, 400);
  double best_t = 0.0, cb = 1e300;
  for (int i = 0; i < 180; ++i) {
    const double t = std::numbers::pi * i / 180;
    const double v = at(coarse, t, 200);
    if (v < cb) {
      cb = v;
      best_t = t;
    }
  }
  const double g = (std::sqrt(5.0) - 1) / 2, step = std::numbers::pi / 180;
  double lo = best_t - step, hi = best_t + step;
  double t1 = hi - g * (hi - lo), t2 = lo + g * (hi - lo);
  double v1 = at(mun, t1, 800), v2 = at(mun, t2, 800);
  for (int it = 0; it < 10; ++it) {
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
  const double brute = std::min(v1, v2);
  const bool ka = a.k && *a.k == 2, kb = b.k && *b.k == 1;
  res.passed = ka && kb && std::abs(flat.value - brute) <= 5e-3;
  res.detail = "k(omega_xy)=" + (a.k ? std::to_string(*a.k) : std::string("none")) +
               " k(line)=" + (b.k ? std::to_string(*b.k) : std::string("none")) + " flat d1=" + fmt(flat.value) +
               " brute force=" + fmt(brute);
  return res;
}

inline CheckResult walk_on_spheres(const SuiteOptions& o) {
  CheckResult res;
  const auto upper = halfspace_domain(2, make_point({0, 1}));
  const auto e1 = wos_harmonic_measure(upper, make_point({0, 1}), {BoundaryQuery::ball("seg", Point{}, 1.0)},
                                       walks(100000, o.seed));
  bool ok = std::abs(e1.queries[0].p - 0.5) <= 3 * e1.queries[0].stderr_;
  std::vector<BoundaryQuery> arcs;
  for (int i = 0; i < 8; ++i)
    arcs.push_back(arc_query("arc" + std::to_string(i), Point{}, 1.0, (i + 0.5) * std::numbers::pi / 4, std::numbers::pi / 4));
  const auto e2 = wos_harmonic_measure(ball_domain(2, Point{}, 1.0), Point{}, arcs, walks(100000, o.seed + 1));
  double worst = 0.0;
  for (const auto& q : e2.queries) worst = std::max(worst, std::abs(q.p - 0.125) / q.stderr_);
  ok = ok && worst <= 3.0;
  res.passed = ok;
  res.detail = "half-plane p=" + fmt(e1.queries[0].p) + " +- " + fmt(e1.queries[0].stderr_) +
               ", disc arcs max deviation " + fmt(worst) + " stderr";
  res.artifacts["wos_halfplane.json"] = e1.to_json().dump();
  res.artifacts["wos_disc.json"] = e2.to_json().dump();
  return res;
}

inline CheckResult elliptic_reduction(const SuiteOptions& o) {
  CheckResult res;
  const auto upper = halfspace_domain(2, make_point({0, 1}));
  const auto est = wos_elliptic_measure(diag41(), upper, make_point({0, 1}), {BoundaryQuery::ball("seg", Point{}, 1.0)},
                                        walks(100000, o.seed + 2));
  const double truth = oracle::half_plane_interval(0.5, 1.0);
  const auto& q = est.queries[0];
  res.passed = std::abs(q.p - truth) <= 3 * q.stderr_;
  res.detail = "p=" + fmt(q.p) + " +- " + fmt(q.stderr_) + " vs (2/pi)atan(1/2)=" + fmt(truth);
  res.artifacts["elliptic.json"] = est.to_json().dump();
  return res;
}

inline CheckResult dimension_formula(const SuiteOptions& o) {
  CheckResult res;
  const auto mu = sample_polymeasure(poly("x*y"), id2(), 1.0);
  const double s_xy = dimension_slope(mu, Point{}, {0.5, 0.25, 0.125, 0.0625});
  const auto upper = halfspace_domain(2, make_point({0, 1}));
  const auto s = run_walks(upper, make_point({0, 1}), walks(1000000, o.seed + 3));
  std::vector<Atom> hits;
  for (const auto& e : s.ends)
    if (!e.aborted) hits.push_back({e.hit, 1.0 / s.ends.size()});
  const DiscreteMeasure omega(2, std::move(hits));
  std::vector<double> radii;
  for (int j = 1; j <= 6; ++j) radii.push_back(std::ldexp(1.0, -j));
  const double s_hp = dimension_slope(omega, Point{}, radii);
  res.passed = std::abs(s_xy - 2.0) <= 0.05 && std::abs(s_hp - 1.0) <= 0.05;
  res.detail = "slope(omega_xy)=" + fmt(s_xy) + " slope(half-plane)=" + fmt(s_hp);
  std::vector<std::vector<double>> rows;
  for (double r : radii) rows.push_back({r, ball_mass(omega, Ball(Point{}, r))});
  res.artifacts["halfplane_mass.csv"] = rows_csv("r,mass", rows);
  return res;
}

inline CheckResult two_sided_blowup(const SuiteOptions& o) {
  CheckResult res;
  const auto upper = halfspace_domain(2, make_point({0, 1}));
  const auto lower = halfspace_domain(2, make_point({0, -1}));
  BlowupOptions opt;
  opt.radii = {1.0, 0.5, 0.25};
  opt.cone = ConeSpec::flat(2);
  opt.cone_options.starts = 16;
  opt.cone_options.refine = 2;
  const auto sym = blowup_experiment(upper, lower, make_point({0, 1}), make_point({0, -1}), Point{}, opt,
                                     walks(200000, o.seed + 4));
  bool dec = true;
  std::ostringstream d;
  for (std::size_t i = 0; i < sym.rows.size(); ++i) {
    const auto& row = sym.rows[i];
    dec = dec && row.d1_plus && row.d1_minus;
    if (dec && i > 0) dec = *row.d1_plus < *sym.rows[i - 1].d1_plus && *row.d1_minus < *sym.rows[i - 1].d1_minus;
    if (row.d1_plus) d << "d1+(" << row.r << ")=" << fmt(*row.d1_plus) << " ";
  }
  BlowupOptions ropt;
  ropt.radii = {1.0, 0.25, 0.0625};
  const auto asym = blowup_experiment(upper, lower, make_point({0, 1}), make_point({1, -1}), Point{}, ropt,
                                      walks(200000, o.seed + 5));
  bool ratio_ok = true;
  for (const auto& row : asym.rows) {
    const double truth = oracle::half_plane_segment(-row.r, row.r, 1.0, 1.0) / oracle::half_plane_interval(row.r, 1.0);
    ratio_ok = ratio_ok && row.ratio && std::abs(*row.ratio - truth) <= 3 * *row.ratio_stderr;
    if (row.ratio) d << "ratio(" << row.r << ")=" << fmt(*row.ratio) << " (exact " << fmt(truth) << ") ";
  }
  res.passed = dec && ratio_ok;
  d << (dec ? "d1 decreasing" : "d1 NOT decreasing");
  res.detail = d.str();
  res.artifacts["blowup_symmetric.csv"] = sym.to_csv();
  res.artifacts["blowup_asymmetric.csv"] = asym.to_csv();
  return res;
}

inline CheckResult weight_inequalities(const SuiteOptions& o) {
  CheckResult res;
  std::mt19937_64 rng(mix64(o.seed ^ 12));
  std::uniform_int_distribution<int> nc(1, 64);
  std::uniform_real_distribution<double> um(0.05, 1.0), us(0.1, 2.0);
  int jensen_bad = 0, korey_bad = 0;
  double worst_korey = 0.0;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10000; ++i) {
    WeightPanel p;
    p.ball = Ball(Point{}, 1.0);
    const int n = nc(rng);
    std::normal_distribution<double> z(0.0, us(rng));
    for (int j = 0; j < n; ++j) {
      const double m = um(rng);
      p.cells.push_back({m, m * std::exp(z(rng))});
    }
    const auto k = korey_check(p);
    jensen_bad += k.k < 1.0;
    if (!k.satisfied) {
      ++korey_bad;
      worst_korey = std::max(worst_korey, k.osc - k.bound);
    }
    if (i < 200) rows.push_back({static_cast<double>(i), k.k, k.osc});
  }
  std::uniform_real_distribution<double> uv(0.01, 100.0);
  double closed = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = uv(rng), b = uv(rng);
    const auto p = oracle::two_valued_panel(a, b);
    closed = std::max(closed, std::abs(a_inf_quantity(p) - (a + b) / (2 * std::sqrt(a * b))) / ((a + b) / (2 * std::sqrt(a * b))));
    closed = std::max(closed, std::abs(bmo_oscillation(p) - std::abs(std::log(a / b)) / 2));
  }
  double hru = 0.0;
  std::uniform_int_distribution<int> small(1, 10);
  std::uniform_real_distribution<double> ud(0.01, 0.99);
  std::normal_distribution<double> z1(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    WeightPanel p;
    p.ball = Ball(Point{}, 1.0);
    const int n = small(rng);
    for (int j = 0; j < n; ++j) {
      const double m = um(rng);
      p.cells.push_back({m, m * std::exp(z1(rng))});
    }
    const double delta = ud(rng);
    const auto r = hru_moduli(p, delta);
    hru = std::max({hru, std::abs(r.fractional - oracle::hru_fractional_enumeration(p, delta)),
                    std::abs(r.integral - oracle::hru_integral_enumeration(p, delta))});
  }
  res.passed = jensen_bad == 0 && korey_bad == 0 && closed <= 1e-12 && hru <= 1e-12;
  res.detail = "K<1 on " + std::to_string(jensen_bad) + "/10000; Korey violated on " + std::to_string(korey_bad) +
               "/10000 (worst excess " + fmt(worst_korey) + "); closed-form error " + fmt(closed) +
               "; hru vs enumeration " + fmt(hru);
  res.artifacts["panels.csv"] = rows_csv("panel,K,osc", rows);
  return res;
}

}  // namespace detail

namespace detail {

// Reruns the artifact-producing checks that fit a short budget under two
// worker counts and compares every artifact byte for byte with a run at the
// current worker count.
inline CheckResult determinism(const SuiteOptions& o) {
  CheckResult res;
  const std::vector<std::function<CheckResult(const SuiteOptions&)>> producers = {
      scaling_law, closed_form_mass, lp_oracle, walk_on_spheres, elliptic_reduction, weight_inequalities};
  auto collect = [&] {
    std::map<std::string, std::string> all;
    for (const auto& p : producers)
      for (auto& [k, v] : p(o).artifacts) all[k] = v;
    return all;
  };
  const int saved = worker_override();
  const auto base = collect();
  std::ostringstream d;
  bool ok = true;
  for (int w : {1, 3}) {
    set_worker_count(w);
    const auto again = collect();
    const bool same = again == base;
    ok = ok && same;
    d << "workers=" << w << (same ? " identical " : " DIFFERENT ");
  }
  set_worker_count(saved);
  d << "(" << base.size() << " artifacts)";
  res.passed = ok;
  res.detail = d.str();
  return res;
}

}  // namespace detail

inline std::vector<CheckInfo> suite_checks() {
  using namespace detail;
  return {
      {1, "scaling-law", "F_r(omega_h) = r^(n+k) F_1(omega_h) for homogeneous h", "F_r/F_1 in [0.99, 1.01] r^3 at r = 0.5, 2", 30, scaling_law},
      {2, "closed-form-mass", "omega_xy: F_1 = 2/3, omega(B(0,r)) = 2 r^2", "1% on F_1, 2% on ball masses", 30, closed_form_mass},
      {3, "weak-form", "integral of phi d omega_h = integral over {h > 0} of h L phi", "16/15 within 0.5%; surface vs weak within 2%", 120, weak_form},
      {4, "pushforward", "omega_(h o S) = (det S)^-1 S^-1 [omega_h^A], A = S^2", "F_B(0,1) gap <= 2% of F_1", 60, pushforward},
      {5, "lp-oracle", "F_B LP against vertex enumeration; F_B(mu, 0) = F_r(mu)", "1e-3 and 1e-10", 120, lp_oracle},
      {6, "taylor-blowup", "tangent measure of omega_h at 0 is c omega_(h_m)", "d_1 strictly decreasing over r = 1..1/8 and < 0.05 at 1/8", 300, taylor_blowup},
      {7, "degree-detection", "degree of the cone containing the blow-ups", "k = 2 for omega_xy, k = 1 for a line; flat d_1 within 5e-3 of brute force", 300, degree_detection},
      {8, "walk-on-spheres", "harmonic measure as Brownian hitting distribution", "3 stderr at 1e5 walks", 60, walk_on_spheres},
      {9, "elliptic-reduction", "omega^(L_A) of E equals harmonic measure of S^-1 E in S^-1 Omega", "3 stderr at 1e5 walks", 60, elliptic_reduction},
      {10, "dimension-formula", "log omega(B(xi,r)) / log r -> n + k - 1", "slope 2 +- 0.05 (omega_xy), 1 +- 0.05 (half-plane, 1e6 walks)", 600, dimension_formula},
      {11, "two-sided-blowup", "two-sided blow-ups of mutually a.c. harmonic measures are flat", "d_1 decreasing over r = 1, 1/2, 1/4; ratio within 3 stderr", 600, two_sided_blowup},
      {12, "weight-inequalities", "K >= 1, osc <= log 2K, two-valued closed forms, Hruscev moduli", "1e-12 closed forms; exact enumeration", 120, weight_inequalities},
      {13, "determinism", "fixed seed gives byte-identical artifacts for any worker count", "byte equality", 300, determinism},
  };
}

inline CheckResult run_check(const CheckInfo& c, const SuiteOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = c.run(o);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.id = c.id;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > c.budget_seconds) {
    r.passed = false;
    r.detail += " (over time budget " + detail::fmt(c.budget_seconds) + " s)";
  }
  return r;
}

inline std::string format_line(const CheckInfo& c, const CheckResult& r) {
  std::ostringstream os;
  os.precision(1);
  os << (r.passed ? "PASS" : "FAIL") << "  " << c.number << " " << c.id << ": " << r.detail << " [" << std::fixed
     << r.seconds << " s]";
  return os.str();
}

}  // namespace gmtlab::verify
