#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gmtlab/cone.hpp"
#include "gmtlab/domain.hpp"
#include "gmtlab/elliptic.hpp"
#include "gmtlab/measure.hpp"
#include "gmtlab/parallel.hpp"
#include "gmtlab/rng.hpp"
#include "gmtlab/weights.hpp"

namespace gmtlab {

struct WalkConfig {
  /// Termination distance, in units of the domain scale.
  double eps_shell = 1e-5;
  std::uint64_t max_steps = 1000000;
  std::uint64_t n_walks = 100000;
  std::uint64_t seed = 1;

  void validate() const {
    require(eps_shell > 0.0 && std::isfinite(eps_shell), "WalkConfig: eps_shell must be positive");
    require(n_walks >= 1, "WalkConfig: n_walks must be at least 1");
    require(max_steps >= 1, "WalkConfig: max_steps must be at least 1");
  }
};

/// Where one walk ended.
struct WalkEnd {
  Point hit{};
  int side = 0;
  bool aborted = false;
  std::uint32_t steps = 0;
};

struct WalkSample {
  int dim = 2;
  std::vector<WalkEnd> ends;
  std::uint64_t aborted = 0;
  double mean_steps = 0.0;
};

namespace detail {

inline Point random_direction(std::mt19937_64& g, int dim) {
  Point u{};
  if (dim == 1) {
    u[0] = uniform01(g) < 0.5 ? -1.0 : 1.0;
    return u;
  }
  if (dim == 2) {
    const double t = 2.0 * std::numbers::pi * uniform01(g);
    u[0] = std::cos(t);
    u[1] = std::sin(t);
    return u;
  }
  double n2 = 0.0;
  do {
    for (int i = 0; i < dim; i += 2) {
      const double a = 1.0 - uniform01(g), b = uniform01(g);
      const double r = std::sqrt(-2.0 * std::log(a));
      u[i] = r * std::cos(2.0 * std::numbers::pi * b);
      if (i + 1 < dim) u[i + 1] = r * std::sin(2.0 * std::numbers::pi * b);
    }
    n2 = dot(u, u);
  } while (n2 == 0.0);
  return (1.0 / std::sqrt(n2)) * u;
}

}  // namespace detail

/// Runs cfg.n_walks walks from the pole. Walk i draws from stream (seed, i),
/// so the output does not depend on the worker count.
inline WalkSample run_walks(const ImplicitDomain& dom, const Point& pole, const WalkConfig& cfg) {
  cfg.validate();
  const double eps = cfg.eps_shell * dom.scale;
  require(dom.inside(pole) && dom.dist(pole) > eps, "wos: pole must lie strictly inside the domain");
  WalkSample s;
  s.dim = dom.dim;
  s.ends.resize(cfg.n_walks);
  parallel_chunks(cfg.n_walks, kDefaultChunks, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t w = b; w < e; ++w) {
      auto g = stream_rng(cfg.seed, w);
      Point x = pole;
      WalkEnd& end = s.ends[w];
      std::uint64_t step = 0;
      for (;; ++step) {
        const double d = dom.dist(x);
        if (d <= eps) break;
        if (step == cfg.max_steps) {
          end.aborted = true;
          break;
        }
        x = x + d * detail::random_direction(g, dom.dim);
      }
      end.steps = static_cast<std::uint32_t>(std::min<std::uint64_t>(step, UINT32_MAX));
      if (!end.aborted) {
        end.side = dom.side_of(x);
        end.hit = dom.project(x);
      }
    }
  });
  double steps = 0.0;
  for (const auto& e : s.ends) {
    s.aborted += e.aborted;
    steps += e.steps;
  }
  s.mean_steps = steps / static_cast<double>(s.ends.size());
  return s;
}

/// The boundary set {y : |T (y - c)| <= radius}, restricted to one face when
/// side != 0. T empty means the identity.
struct BoundaryQuery {
  std::string label;
  Point center{};
  double radius = 1.0;
  Eigen::MatrixXd shape;
  int side = 0;

  static BoundaryQuery ball(std::string label, const Point& c, double r, int side = 0) {
    require(r > 0.0 && std::isfinite(r), "BoundaryQuery: radius must be positive");
    return BoundaryQuery{std::move(label), c, r, Eigen::MatrixXd(), side};
  }

  bool contains(const Point& y, int s, int dim) const {
    if (side != 0 && s != side) return false;
    Point v = y - center;
    if (shape.size() > 0) v = to_point(shape * to_vector(v, dim));
    return norm(v) <= radius;
  }

  /// Image under y -> m y.
  BoundaryQuery mapped(const Eigen::MatrixXd& m) const {
    const int n = static_cast<int>(m.rows());
    const Eigen::MatrixXd inv = m.inverse();
    BoundaryQuery q = *this;
    q.center = to_point(m * to_vector(center, n));
    q.shape = (shape.size() > 0 ? shape : Eigen::MatrixXd::Identity(n, n)) * inv;
    return q;
  }
};

/// Arc of the circle |x - c| = R of angular width theta centred at angle phi.
inline BoundaryQuery arc_query(std::string label, const Point& c, double big_r, double phi, double theta) {
  require(theta > 0.0 && theta < 2.0 * std::numbers::pi, "arc_query: angle must lie in (0, 2 pi)");
  const Point mid = c + big_r * make_point({std::cos(phi), std::sin(phi)});
  return BoundaryQuery::ball(std::move(label), mid, 2.0 * big_r * std::sin(theta / 4.0));
}

struct QueryEstimate {
  std::string label;
  double p = 0.0;
  double stderr_ = 0.0;
  std::uint64_t hits = 0;
};

struct HarmonicMeasureEstimate {
  std::vector<QueryEstimate> queries;
  std::uint64_t n_walks = 0;
  std::uint64_t aborted = 0;
  double aborted_fraction = 0.0;
  double mean_steps = 0.0;
  std::optional<std::string> warning;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n_walks"] = n_walks;
    j["aborted"] = aborted;
    j["aborted_fraction"] = aborted_fraction;
    j["mean_steps"] = mean_steps;
    j["queries"] = nlohmann::json::array();
    for (const auto& q : queries)
      j["queries"].push_back({{"label", q.label}, {"p", q.p}, {"stderr", q.stderr_}, {"hits", q.hits}});
    if (warning) j["warning"] = *warning;
    return j;
  }
};

inline double binomial_stderr(double p, std::uint64_t n) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / n); }

inline HarmonicMeasureEstimate tally(const WalkSample& s, const std::vector<BoundaryQuery>& queries) {
  HarmonicMeasureEstimate est;
  est.n_walks = s.ends.size();
  est.aborted = s.aborted;
  est.aborted_fraction = static_cast<double>(s.aborted) / est.n_walks;
  est.mean_steps = s.mean_steps;
  for (const auto& q : queries) {
    std::uint64_t hits = 0;
    for (const auto& e : s.ends)
      if (!e.aborted && q.contains(e.hit, e.side, s.dim)) ++hits;
    const double p = static_cast<double>(hits) / est.n_walks;
    est.queries.push_back({q.label, p, binomial_stderr(p, est.n_walks), hits});
  }
  if (est.aborted_fraction > 0.01) {
    std::ostringstream os;
    os << "aborted-walk fraction " << est.aborted_fraction << " exceeds 1%";
    est.warning = os.str();
  }
  return est;
}

inline HarmonicMeasureEstimate wos_harmonic_measure(const ImplicitDomain& dom, const Point& pole,
                                                    const std::vector<BoundaryQuery>& queries, const WalkConfig& cfg) {
  return tally(run_walks(dom, pole, cfg), queries);
}

/// Change of variables x = S x' with S the square root of the symmetric part
/// of A: L_A-harmonic measure of E from the pole in Omega equals harmonic
/// measure of S^-1 E from S^-1 pole in S^-1 Omega.
struct EllipticReduction {
  ImplicitDomain domain;
  Point pole{};
  Eigen::MatrixXd s;
  Eigen::MatrixXd s_inv;

  BoundaryQuery map_query(const BoundaryQuery& q) const { return q.mapped(s_inv); }
};

inline EllipticReduction elliptic_reduce(const ConstantEllipticMatrix& a, const ImplicitDomain& dom, const Point& pole) {
  require(a.dim() == dom.dim, "elliptic_reduce: matrix and domain dimensions differ");
  const auto sq = symmetrize_sqrt(a);
  EllipticReduction r;
  r.s = sq.s;
  r.s_inv = sq.s_inv;
  r.domain = affine_image(dom, sq.s_inv);
  r.pole = to_point(sq.s_inv * to_vector(pole, dom.dim));
  return r;
}

inline HarmonicMeasureEstimate wos_elliptic_measure(const ConstantEllipticMatrix& a, const ImplicitDomain& dom,
                                                    const Point& pole, const std::vector<BoundaryQuery>& queries,
                                                    const WalkConfig& cfg) {
  const auto red = elliptic_reduce(a, dom, pole);
  std::vector<BoundaryQuery> mapped;
  for (const auto& q : queries) mapped.push_back(red.map_query(q));
  return wos_harmonic_measure(red.domain, red.pole, mapped, cfg);
}

// ---------------------------------------------------------------------------
// Blow-up experiment

struct BlowupOptions {
  std::vector<double> radii = {1.0, 0.5, 0.25};
  /// Histogram cells across the diameter of each ball.
  int hist_bins = 64;
  /// Panel cells across the diameter, for the A_inf quantity.
  int panel_cells = 8;
  std::optional<ConeSpec> cone;
  ConeOptions cone_options{};
};

struct BlowupRow {
  double r = 0.0;
  std::uint64_t hits_plus = 0, hits_minus = 0;
  double mass_plus = 0.0, mass_minus = 0.0;
  double stderr_plus = 0.0, stderr_minus = 0.0;
  std::optional<double> ratio, ratio_stderr;
  std::optional<double> d1_plus, d1_minus;
  std::optional<double> k, osc;
  bool insufficient = false;
};

struct BlowupReport {
  std::vector<BlowupRow> rows;
  std::optional<double> slope_plus, slope_minus;
  std::uint64_t n_walks = 0;
  std::uint64_t aborted_plus = 0, aborted_minus = 0;
  std::vector<DiscreteMeasure> blowups_plus, blowups_minus;

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    auto opt = [&](const std::optional<double>& v) {
      if (v) os << *v;
    };
    os << "r,hits_plus,hits_minus,mass_plus,mass_minus,stderr_plus,stderr_minus,ratio,ratio_stderr,d1_plus,d1_minus,K,osc,"
          "insufficient\n";
    for (const auto& row : rows) {
      os << row.r << ',' << row.hits_plus << ',' << row.hits_minus << ',' << row.mass_plus << ',' << row.mass_minus << ','
         << row.stderr_plus << ',' << row.stderr_minus << ',';
      opt(row.ratio);
      os << ',';
      opt(row.ratio_stderr);
      os << ',';
      opt(row.d1_plus);
      os << ',';
      opt(row.d1_minus);
      os << ',';
      opt(row.k);
      os << ',';
      opt(row.osc);
      os << ',' << (row.insufficient ? 1 : 0) << '\n';
    }
    return os.str();
  }
};

namespace detail {

using CellKey = std::array<std::int64_t, kMaxDim>;

inline CellKey cell_of(const Point& x, const Point& origin, double h, int dim) {
  CellKey k{};
  for (int i = 0; i < dim; ++i) k[i] = static_cast<std::int64_t>(std::floor((x[i] - origin[i]) / h));
  return k;
}

// Hits inside B(xi, r) binned into cubes of side h; atoms at cell centroids
// with weight count / n.
inline DiscreteMeasure hit_histogram(const WalkSample& s, const Point& xi, double r, double h) {
  std::map<CellKey, std::pair<Point, std::uint64_t>> cells;
  for (const auto& e : s.ends) {
    if (e.aborted || distance(e.hit, xi) >= r) continue;
    auto& c = cells[cell_of(e.hit, xi, h, s.dim)];
    c.first = c.first + e.hit;
    ++c.second;
  }
  std::vector<Atom> atoms;
  const double n = static_cast<double>(s.ends.size());
  for (const auto& [k, c] : cells) atoms.push_back({(1.0 / c.second) * c.first, c.second / n});
  return DiscreteMeasure(s.dim, std::move(atoms));
}

inline std::map<CellKey, std::uint64_t> cell_counts(const WalkSample& s, const Point& xi, double r, double h) {
  std::map<CellKey, std::uint64_t> out;
  for (const auto& e : s.ends)
    if (!e.aborted && distance(e.hit, xi) < r) ++out[cell_of(e.hit, xi, h, s.dim)];
  return out;
}

}  // namespace detail

/// Panel over B(xi, r) from two walk samples: mu = omega+, nu = omega-.
inline WeightPanel hit_panel(const WalkSample& plus, const WalkSample& minus, const Point& xi, double r, int cells) {
  const double h = 2.0 * r / cells;
  auto cp = detail::cell_counts(plus, xi, r, h);
  auto cm = detail::cell_counts(minus, xi, r, h);
  std::map<detail::CellKey, WeightCell> all;
  for (const auto& [k, c] : cp) all[k].mu_mass = static_cast<double>(c) / plus.ends.size();
  for (const auto& [k, c] : cm) all[k].nu_mass = static_cast<double>(c) / minus.ends.size();
  WeightPanel p;
  p.ball = Ball(xi, r);
  for (const auto& [k, c] : all) p.cells.push_back(c);
  return p;
}

inline BlowupReport blowup_experiment(const ImplicitDomain& dom_plus, const ImplicitDomain& dom_minus,
                                      const Point& pole_plus, const Point& pole_minus, const Point& xi,
                                      const BlowupOptions& opt, const WalkConfig& cfg) {
  require(!opt.radii.empty(), "blowup_experiment: no radii");
  for (std::size_t i = 0; i < opt.radii.size(); ++i) {
    require(opt.radii[i] > 0.0, "blowup_experiment: radii must be positive");
    if (i > 0) require(opt.radii[i] < opt.radii[i - 1], "blowup_experiment: radii must decrease");
  }
  require(opt.hist_bins >= 1 && opt.panel_cells >= 1, "blowup_experiment: bin counts must be positive");
  require(dom_plus.dim == dom_minus.dim, "blowup_experiment: domain dimensions differ");
  const double tol = 1e-6 * std::max(dom_plus.scale, dom_minus.scale);
  require(dom_plus.dist(xi) <= tol && dom_minus.dist(xi) <= tol && distance(dom_plus.project(xi), xi) <= tol &&
              distance(dom_minus.project(xi), xi) <= tol,
          "blowup_experiment: xi must lie on the common boundary");

  WalkConfig cm = cfg;
  cm.seed = mix64(cfg.seed ^ 0x5bd1e995ULL);
  const auto sp = run_walks(dom_plus, pole_plus, cfg);
  const auto sm = run_walks(dom_minus, pole_minus, cm);

  BlowupReport rep;
  rep.n_walks = cfg.n_walks;
  rep.aborted_plus = sp.aborted;
  rep.aborted_minus = sm.aborted;
  const double n = static_cast<double>(cfg.n_walks);
  std::vector<double> lr, lp, lm;
  for (double r : opt.radii) {
    BlowupRow row;
    row.r = r;
    for (const auto& e : sp.ends) row.hits_plus += !e.aborted && distance(e.hit, xi) < r;
    for (const auto& e : sm.ends) row.hits_minus += !e.aborted && distance(e.hit, xi) < r;
    row.mass_plus = row.hits_plus / n;
    row.mass_minus = row.hits_minus / n;
    row.stderr_plus = binomial_stderr(row.mass_plus, cfg.n_walks);
    row.stderr_minus = binomial_stderr(row.mass_minus, cfg.n_walks);
    row.insufficient = row.hits_plus == 0 || row.hits_minus == 0;
    if (!row.insufficient) {
      lr.push_back(std::log(r));
      lp.push_back(std::log(row.mass_plus));
      lm.push_back(std::log(row.mass_minus));
      row.ratio = row.mass_minus / row.mass_plus;
      row.ratio_stderr = *row.ratio * std::sqrt((1.0 - row.mass_plus) / row.hits_plus + (1.0 - row.mass_minus) / row.hits_minus);
      const double h = 2.0 * r / opt.hist_bins;
      const auto bp = translate_dilate(detail::hit_histogram(sp, xi, r, h), xi, r).scaled(1.0 / row.mass_plus);
      const auto bm = translate_dilate(detail::hit_histogram(sm, xi, r, h), xi, r).scaled(1.0 / row.mass_minus);
      if (opt.cone) {
        row.d1_plus = cone_distance(bp, *opt.cone, 1.0, opt.cone_options).value;
        row.d1_minus = cone_distance(bm, *opt.cone, 1.0, opt.cone_options).value;
      }
      rep.blowups_plus.push_back(bp);
      rep.blowups_minus.push_back(bm);
      try {
        const auto panel = hit_panel(sp, sm, xi, r, opt.panel_cells);
        row.k = a_inf_quantity(panel);
        row.osc = bmo_oscillation(panel);
      } catch (const LogDivergence&) {
        row.insufficient = true;
      }
    } else {
      rep.blowups_plus.emplace_back(dom_plus.dim);
      rep.blowups_minus.emplace_back(dom_plus.dim);
    }
    rep.rows.push_back(row);
  }
  if (lr.size() >= 2) {
    rep.slope_plus = least_squares_slope(lr, lp);
    rep.slope_minus = least_squares_slope(lr, lm);
  }
  return rep;
}

}  // namespace gmtlab
