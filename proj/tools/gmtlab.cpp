// gmtlab command line: every library operation as a subcommand.
//
//   gmtlab polymeasure sample --h "x*y" --R 1 --out run1
//   gmtlab cone scan --input run1/sample.csv --xi 0,0 --cone F2 --radii 1,0.5,0.25
//   gmtlab --config experiment.json
//
// Prints one JSON line to stdout. Exit 0 on success, 2 on invalid input, 3 on
// numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmtlab/bounded_lipschitz.hpp"
#include "gmtlab/cone.hpp"
#include "gmtlab/elliptic.hpp"
#include "gmtlab/io.hpp"
#include "gmtlab/measure.hpp"
#include "gmtlab/parallel.hpp"
#include "gmtlab/polymeasure.hpp"
#include "gmtlab/polynomial_parser.hpp"
#include "gmtlab/stochastic.hpp"
#include "gmtlab/verify/acceptance.hpp"
#include "gmtlab/weights.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace gmtlab;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::string out = ".";
  int threads = 0;
  std::uint64_t seed = 1;
  bool seed_given = false;
};

Globals g;
json summary;

// --- argument helpers ------------------------------------------------------

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidInput(what + ": '" + item + "' is not a number");
    }
  }
  require(!out.empty(), what + ": empty list");
  return out;
}

Point parse_point(const std::string& s, int dim, const std::string& what) {
  const auto v = parse_list(s, what);
  require(static_cast<int>(v.size()) == dim, what + ": expected " + std::to_string(dim) + " coordinates");
  Point p{};
  for (int i = 0; i < dim; ++i) p[i] = v[i];
  return p;
}

Eigen::MatrixXd parse_raw_matrix(const std::string& s, int dim) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(s);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_list(row, "matrix"));
  require(static_cast<int>(rows.size()) == dim, "matrix: expected " + std::to_string(dim) + " rows");
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    require(static_cast<int>(rows[i].size()) == dim, "matrix: row " + std::to_string(i) + " has the wrong length");
    for (int j = 0; j < dim; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// "a,b;c,d" rows separated by ';'. Empty means the identity.
ConstantEllipticMatrix parse_matrix(const std::string& s, int dim) {
  if (s.empty()) return ConstantEllipticMatrix::identity(dim);
  return check_ellipticity(parse_raw_matrix(s, dim));
}

// A JSON literal or the path of a file holding one.
json json_arg(const std::string& s, const std::string& what) {
  std::string text = s;
  if (!s.empty() && s[0] != '{' && s[0] != '[') text = read_file(s);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(what + ": " + e.what());
  }
}

std::vector<BoundaryQuery> parse_queries(const std::string& s, int dim) {
  const json j = json_arg(s, "queries");
  require(j.is_array() && !j.empty(), "queries: nonempty array expected");
  std::vector<BoundaryQuery> out;
  for (const auto& q : j) {
    require(q.is_object(), "queries: objects expected");
    for (auto it = q.begin(); it != q.end(); ++it)
      require(it.key() == "label" || it.key() == "center" || it.key() == "radius" || it.key() == "side",
              "queries: unknown field '" + it.key() + "'");
    require(q.contains("center") && q.contains("radius"), "queries: 'center' and 'radius' are required");
    out.push_back(BoundaryQuery::ball(q.value("label", "q" + std::to_string(out.size())),
                                      point_from_json(q["center"], dim, "query center"), q["radius"].get<double>(),
                                      q.value("side", 0)));
  }
  return out;
}

fs::path artifact(const std::string& name) {
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

void write_artifact(const std::string& name, const std::string& content) {
  const auto p = artifact(name);
  write_file_atomic(p, content);
  summary["artifacts"].push_back(p.string());
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

WalkConfig walk_config(std::uint64_t n, double eps, std::uint64_t max_steps) {
  require(g.seed_given, "a seed is required for stochastic subcommands (--seed)");
  WalkConfig c;
  c.n_walks = n;
  c.eps_shell = eps;
  c.max_steps = max_steps;
  c.seed = g.seed;
  c.validate();
  return c;
}

// --- subcommands -------------------------------------------------------------

void add_polycore(CLI::App& app) {
  auto* pc = app.add_subcommand("polycore", "harmonic polynomial bases and operators")->require_subcommand(1);

  static int dim = 2, k = 1;
  static std::string a, h;

  auto* basis = pc->add_subcommand("basis", "basis of homogeneous L_A-harmonic polynomials of degree k");
  basis->add_option("--dim", dim)->check(CLI::Range(1, 4));
  basis->add_option("--k", k)->required();
  basis->add_option("--a", a, "coefficient matrix 'a,b;c,d'");
  basis->callback([] {
    const auto b = harmonic_basis(dim, k, parse_matrix(a, dim));
    json arr = json::array();
    for (const auto& p : b) arr.push_back(p.to_string());
    summary["basis"] = arr;
    summary["size"] = b.size();
  });

  auto* apply = pc->add_subcommand("apply", "L_A h = -div(A grad h)");
  apply->add_option("--h", h)->required();
  apply->add_option("--dim", dim)->check(CLI::Range(1, 4));
  apply->add_option("--a", a);
  apply->callback([] {
    const auto p = parse_polynomial(h, dim);
    const auto r = apply_operator(parse_matrix(a, p.dim()), p);
    summary["result"] = r.to_string();
    summary["harmonic"] = r.pruned(1e-12).is_zero();
  });

  auto* sq = pc->add_subcommand("sqrt", "symmetric square root S of the symmetric part of A");
  sq->add_option("--a", a)->required();
  sq->add_option("--dim", dim)->check(CLI::Range(1, 4));
  sq->callback([] {
    const auto d = symmetrize_sqrt(parse_matrix(a, dim));
    summary["s"] = matrix_to_json(d.s);
    summary["s_inv"] = matrix_to_json(d.s_inv);
    summary["det_s"] = d.det_s;
  });
}

void add_measure(CLI::App& app) {
  auto* m = app.add_subcommand("measure", "discrete measures")->require_subcommand(1);
  static std::string input, sigma, center = "", xi = "", radii, matrix, output = "pushforward.csv";
  static double r = 1.0, scale = 1.0;

  auto* fr = m->add_subcommand("fr", "F_r(mu)");
  fr->add_option("--input", input)->required();
  fr->add_option("--r", r);
  fr->callback([] { summary["F_r"] = f_r(load_measure(input), r); });

  auto* fb = m->add_subcommand("fball", "F_B(mu, sigma) with its dual certificate");
  fb->add_option("--input", input)->required();
  fb->add_option("--sigma", sigma, "second measure (default zero)");
  fb->add_option("--center", center);
  fb->add_option("--radius", r);
  fb->callback([] {
    const auto mu = load_measure(input);
    const auto s = sigma.empty() ? DiscreteMeasure(mu.dim()) : load_measure(sigma);
    const Point c = center.empty() ? Point{} : parse_point(center, mu.dim(), "center");
    const auto res = f_ball_detailed(mu, s, Ball(c, r));
    summary["F_B"] = res.value;
    summary["dual_value"] = res.dual_value;
    summary["duality_gap"] = res.duality_gap;
    summary["dual_infeasibility"] = res.dual_infeasibility;
    summary["coarsening_error"] = res.coarsening_error;
  });

  auto* pf = m->add_subcommand("pushforward", "image under x -> M x, weights times scale");
  pf->add_option("--input", input)->required();
  pf->add_option("--matrix", matrix)->required();
  pf->add_option("--scale", scale);
  pf->add_option("--output", output);
  pf->callback([] {
    const auto mu = load_measure(input);
    const auto out = linear_pushforward(mu, parse_raw_matrix(matrix, mu.dim()), scale);
    write_artifact(output, measure_to_csv(out));
    summary["atoms"] = out.size();
  });

  auto* db = m->add_subcommand("doubling", "mu(B(xi, 2r)) / mu(B(xi, r))");
  db->add_option("--input", input)->required();
  db->add_option("--xi", xi);
  db->add_option("--radii", radii)->required();
  db->callback([] {
    const auto mu = load_measure(input);
    const auto p = doubling_profile(mu, xi.empty() ? Point{} : parse_point(xi, mu.dim(), "xi"), parse_list(radii, "radii"));
    json arr = json::array();
    for (const auto& v : p) arr.push_back(optional_json(v));
    summary["ratios"] = arr;
  });

  auto* dm = m->add_subcommand("dimension", "slope of log mu(B(xi, r)) against log r");
  dm->add_option("--input", input)->required();
  dm->add_option("--xi", xi);
  dm->add_option("--radii", radii)->required();
  dm->callback([] {
    const auto mu = load_measure(input);
    summary["slope"] = dimension_slope(mu, xi.empty() ? Point{} : parse_point(xi, mu.dim(), "xi"), parse_list(radii, "radii"));
  });
}

void add_polymeasure(CLI::App& app) {
  auto* pm = app.add_subcommand("polymeasure", "surface measures of harmonic polynomials")->require_subcommand(1);
  static std::string h, a, center, radii, q, output = "sample.csv";
  static int dim = 2, grid = 0, power = 3;
  static double big_r = 1.0, eps = 0.0, rho = 1.0;

  auto* s = pm->add_subcommand("sample", "sample omega_h^A on B(0, R)");
  s->add_option("--h", h)->required();
  s->add_option("--dim", dim)->check(CLI::Range(1, 4));
  s->add_option("--a", a);
  s->add_option("--R", big_r);
  s->add_option("--eps", eps, "shell half-width (0 = automatic)");
  s->add_option("--grid", grid);
  s->add_option("--output", output);
  s->callback([] {
    PolyMeasureSpec spec;
    spec.h = parse_polynomial(h, dim);
    spec.a = parse_matrix(a, spec.h.dim());
    spec.radius = big_r;
    spec.shell_eps = eps;
    spec.grid_n = grid;
    const auto res = sample_polymeasure(spec);
    write_artifact(output, measure_to_csv(res.measure));
    summary["atoms"] = res.measure.size();
    summary["F1"] = f_r(res.measure, 1.0);
    summary["mass"] = res.measure.total_mass();
    summary["shell_eps"] = res.diagnostics.shell_eps;
    summary["skipped_mass"] = res.diagnostics.skipped_mass;
  });

  auto* w = pm->add_subcommand("weakpair", "integral of phi against omega_h^A via the volume form");
  w->add_option("--h", h)->required();
  w->add_option("--dim", dim)->check(CLI::Range(1, 4));
  w->add_option("--a", a);
  w->add_option("--center", center);
  w->add_option("--rho", rho);
  w->add_option("--power", power);
  w->add_option("--q", q, "polynomial factor of the test function");
  w->add_option("--grid", grid);
  w->callback([] {
    const auto p = parse_polynomial(h, dim);
    auto phi = TestFunction::bump(p.dim(), center.empty() ? Point{} : parse_point(center, p.dim(), "center"), rho, power);
    if (!q.empty()) phi.q = parse_polynomial(q, p.dim());
    summary["value"] = weak_pairing(p, parse_matrix(a, p.dim()), phi, grid);
  });

  auto* sc = pm->add_subcommand("scaling", "F_r scaling and dilation laws");
  sc->add_option("--h", h)->required();
  sc->add_option("--dim", dim)->check(CLI::Range(1, 4));
  sc->add_option("--a", a);
  sc->add_option("--radii", radii)->required();
  sc->add_option("--grid", grid);
  sc->callback([] {
    const auto p = parse_polynomial(h, dim);
    ScalingOptions opt;
    opt.grid_n = grid;
    opt.radius_law = p.is_homogeneous();
    const auto rep = scaling_report(p, parse_matrix(a, p.dim()), parse_list(radii, "radii"), opt);
    std::ostringstream os;
    os << "r,measured,predicted,rel_err,discrepancy,scale\n";
    for (std::size_t i = 0; i < rep.dilation.size(); ++i) {
      const auto& d = rep.dilation[i];
      if (i < rep.rows.size())
        os << format_double(d.r) << ',' << format_double(rep.rows[i].measured) << ','
           << format_double(rep.rows[i].predicted) << ',' << format_double(rep.rows[i].rel_err) << ',';
      else
        os << format_double(d.r) << ",,,,";
      os << format_double(d.discrepancy) << ',' << format_double(d.scale) << '\n';
    }
    write_artifact("scaling.csv", os.str());
    double worst = 0.0;
    for (const auto& row : rep.rows) worst = std::max(worst, row.rel_err);
    summary["max_rel_err"] = worst;
  });
}

void add_cone(CLI::App& app) {
  auto* c = app.add_subcommand("cone", "distances to cones of polynomial measures")->require_subcommand(1);
  static std::string input, cone = "flat", a, xi, radii, points, candidates, x;
  static double r = 1.0;
  static int kmax = 3, starts = 32;

  auto opts = [](CLI::App* s) {
    s->add_option("--input", input)->required();
    s->add_option("--a", a);
    s->add_option("--starts", starts);
  };
  auto cone_opt = [] {
    ConeOptions o;
    o.starts = starts;
    o.seed = g.seed;
    return o;
  };

  auto* d = c->add_subcommand("distance", "d_r(mu, cone)");
  opts(d);
  d->add_option("--cone", cone);
  d->add_option("--r", r);
  d->callback([cone_opt] {
    const auto mu = load_measure(input);
    const auto res = cone_distance(mu, ConeSpec::parse(cone, mu.dim(), parse_matrix(a, mu.dim())), r, cone_opt());
    summary["d"] = res.value;
    summary["witness"] = res.witness.to_string();
    summary["evaluations"] = res.evaluations;
  });

  auto* s = c->add_subcommand("scan", "d_1 of the blow-ups T_{xi,r}[mu]");
  opts(s);
  s->add_option("--cone", cone);
  s->add_option("--xi", xi);
  s->add_option("--radii", radii)->required();
  s->callback([cone_opt] {
    const auto mu = load_measure(input);
    const auto rows = scale_scan(mu, xi.empty() ? Point{} : parse_point(xi, mu.dim(), "xi"),
                                 ConeSpec::parse(cone, mu.dim(), parse_matrix(a, mu.dim())), parse_list(radii, "radii"),
                                 cone_opt());
    std::ostringstream os;
    os << "r,d1\n";
    json arr = json::array();
    for (const auto& row : rows) {
      os << format_double(row.r) << ',' << format_double(row.d1) << '\n';
      arr.push_back(row.d1);
    }
    write_artifact("scan.csv", os.str());
    summary["d1"] = arr;
  });

  auto* dg = c->add_subcommand("degree", "smallest k whose cone contains the blow-ups");
  opts(dg);
  dg->add_option("--xi", xi);
  dg->add_option("--radii", radii)->required();
  dg->add_option("--kmax", kmax);
  dg->callback([cone_opt] {
    const auto mu = load_measure(input);
    const auto res = detect_degree(mu, xi.empty() ? Point{} : parse_point(xi, mu.dim(), "xi"), kmax,
                                   parse_list(radii, "radii"), parse_matrix(a, mu.dim()), cone_opt());
    summary["k"] = res.k ? json(*res.k) : json(nullptr);
    std::ostringstream os;
    os << "k,r,d1\n";
    for (const auto& row : res.table) os << row.k << ',' << format_double(row.r) << ',' << format_double(row.d1) << '\n';
    write_artifact("degree.csv", os.str());
  });

  auto* th = c->add_subcommand("theta", "bilateral Hausdorff flatness against candidate zero sets");
  th->add_option("--points", points, "measure CSV whose atom positions form the sample")->required();
  th->add_option("--x", x);
  th->add_option("--r", r);
  th->add_option("--candidates", candidates, "polynomials separated by ';'")->required();
  th->callback([] {
    const auto mu = load_measure(points);
    std::vector<Point> pts;
    for (const auto& at : mu.atoms()) pts.push_back(at.x);
    std::vector<Polynomial> cands;
    std::stringstream ss(candidates);
    std::string item;
    while (std::getline(ss, item, ';')) cands.push_back(parse_polynomial(item, mu.dim()));
    summary["theta"] = flatness_theta(pts, x.empty() ? Point{} : parse_point(x, mu.dim(), "x"), r, cands, mu.dim());
  });
}

void add_wos(CLI::App& app) {
  auto* w = app.add_subcommand("wos", "walk-on-spheres harmonic and elliptic measure")->require_subcommand(1);
  static std::string domain, pole, queries, a, dplus, dminus, pplus, pminus, xi, radii = "1,0.5,0.25", cone;
  static std::uint64_t walks = 100000, max_steps = 1000000;
  static double eps = 1e-5;
  static int bins = 64, cells = 8;

  auto common = [](CLI::App* s) {
    s->add_option("--walks", walks);
    s->add_option("--eps", eps, "shell width in units of the domain scale");
    s->add_option("--max-steps", max_steps);
  };

  auto* m = w->add_subcommand("measure", "harmonic measure of boundary queries");
  m->add_option("--domain", domain, "domain JSON or file")->required();
  m->add_option("--pole", pole)->required();
  m->add_option("--queries", queries, "query JSON array or file")->required();
  common(m);
  m->callback([] {
    const auto dom = domain_from_json(json_arg(domain, "domain"));
    const auto est = wos_harmonic_measure(dom, parse_point(pole, dom.dim, "pole"), parse_queries(queries, dom.dim),
                                          walk_config(walks, eps, max_steps));
    write_artifact("estimate.json", est.to_json().dump(2) + "\n");
    summary["estimate"] = est.to_json();
  });

  auto* r = w->add_subcommand("reduce", "L_A elliptic measure through the harmonic reduction");
  r->add_option("--a", a)->required();
  r->add_option("--domain", domain)->required();
  r->add_option("--pole", pole)->required();
  r->add_option("--queries", queries);
  common(r);
  r->callback([] {
    const auto dom = domain_from_json(json_arg(domain, "domain"));
    const auto mat = parse_matrix(a, dom.dim);
    const Point p = parse_point(pole, dom.dim, "pole");
    const auto red = elliptic_reduce(mat, dom, p);
    json pj = json::array();
    for (int i = 0; i < dom.dim; ++i) pj.push_back(red.pole[i]);
    summary["pole"] = pj;
    summary["s"] = matrix_to_json(red.s);
    summary["domain"] = red.domain.description;
    if (!queries.empty()) {
      const auto est = wos_elliptic_measure(mat, dom, p, parse_queries(queries, dom.dim), walk_config(walks, eps, max_steps));
      write_artifact("estimate.json", est.to_json().dump(2) + "\n");
      summary["estimate"] = est.to_json();
    }
  });

  auto* b = w->add_subcommand("blowup", "two-sided blow-up experiment at a boundary point");
  b->add_option("--domain-plus", dplus)->required();
  b->add_option("--domain-minus", dminus)->required();
  b->add_option("--pole-plus", pplus)->required();
  b->add_option("--pole-minus", pminus)->required();
  b->add_option("--xi", xi);
  b->add_option("--radii", radii);
  b->add_option("--cone", cone, "cone for d_1 (omit to skip)");
  b->add_option("--bins", bins);
  b->add_option("--cells", cells);
  common(b);
  b->callback([] {
    const auto dp = domain_from_json(json_arg(dplus, "domain-plus"));
    const auto dm = domain_from_json(json_arg(dminus, "domain-minus"));
    BlowupOptions opt;
    opt.radii = parse_list(radii, "radii");
    opt.hist_bins = bins;
    opt.panel_cells = cells;
    if (!cone.empty()) opt.cone = ConeSpec::parse(cone, dp.dim, ConstantEllipticMatrix::identity(dp.dim));
    opt.cone_options.seed = g.seed;
    const auto rep = blowup_experiment(dp, dm, parse_point(pplus, dp.dim, "pole-plus"), parse_point(pminus, dp.dim, "pole-minus"),
                                       xi.empty() ? Point{} : parse_point(xi, dp.dim, "xi"), opt,
                                       walk_config(walks, eps, max_steps));
    write_artifact("blowup.csv", rep.to_csv());
    for (std::size_t i = 0; i < rep.blowups_plus.size(); ++i) {
      write_artifact("blowup_plus_" + std::to_string(i) + ".csv", measure_to_csv(rep.blowups_plus[i]));
      write_artifact("blowup_minus_" + std::to_string(i) + ".csv", measure_to_csv(rep.blowups_minus[i]));
    }
    summary["slope_plus"] = optional_json(rep.slope_plus);
    summary["slope_minus"] = optional_json(rep.slope_minus);
  });
}

void add_weights(CLI::App& app) {
  auto* w = app.add_subcommand("weights", "A_inf / BMO diagnostics on cell panels")->require_subcommand(1);
  static std::string panel, panels, radii;
  static double delta = 0.1;

  auto* k = w->add_subcommand("k", "A_inf quantity K");
  k->add_option("--panel", panel)->required();
  k->callback([] { summary["K"] = a_inf_quantity(panel_from_csv(read_file(panel))); });

  auto* b = w->add_subcommand("bmo", "mean oscillation of log f");
  b->add_option("--panel", panel)->required();
  b->callback([] { summary["osc"] = bmo_oscillation(panel_from_csv(read_file(panel))); });

  auto* kc = w->add_subcommand("korey", "osc against log 2K");
  kc->add_option("--panel", panel)->required();
  kc->callback([] {
    const auto r = korey_check(panel_from_csv(read_file(panel)));
    summary["osc"] = r.osc;
    summary["K"] = r.k;
    summary["bound"] = r.bound;
    summary["satisfied"] = r.satisfied;
    summary["osc_over_sqrt_k_minus_1"] = optional_json(r.sqrt_ratio);
  });

  auto* h = w->add_subcommand("hru", "worst nu(F)/nu(B) over mu(F)/mu(B) <= delta");
  h->add_option("--panel", panel)->required();
  h->add_option("--delta", delta);
  h->callback([] {
    const auto r = hru_moduli(panel_from_csv(read_file(panel)), delta);
    summary["fractional"] = r.fractional;
    summary["integral"] = r.integral;
    summary["integral_exact"] = r.integral_exact;
    summary["gap"] = r.gap();
  });

  auto* s = w->add_subcommand("scan", "K and osc over shrinking balls");
  s->add_option("--panels", panels, "comma-separated panel CSVs, largest ball first")->required();
  s->add_option("--radii", radii)->required();
  s->callback([] {
    std::vector<std::string> files;
    std::stringstream ss(panels);
    std::string item;
    while (std::getline(ss, item, ',')) files.push_back(item);
    const auto rs = parse_list(radii, "radii");
    require(rs.size() == files.size(), "weights scan: one radius per panel");
    std::vector<WeightPanel> ps;
    for (std::size_t i = 0; i < files.size(); ++i) {
      auto p = panel_from_csv(read_file(files[i]));
      p.ball = Ball(Point{}, rs[i]);
      ps.push_back(std::move(p));
    }
    const auto prof = va_inf_scan(ps);
    write_artifact("profile.csv", profile_to_csv(prof));
    summary["vanishing"] = prof.vanishing;
  });
}

int add_verify(CLI::App& app, int& status) {
  auto* v = app.add_subcommand("verify", "acceptance suite: 'all', 'list' or a check id");
  static std::string which;
  v->add_option("check", which, "all | list | <check-id>")->required();
  v->callback([&status] {
    const auto checks = verify::suite_checks();
    if (which == "list") {
      json arr = json::array();
      double total = 0.0;
      for (const auto& c : checks) {
        arr.push_back({{"number", c.number}, {"id", c.id}, {"anchor", c.anchor}, {"tolerance", c.tolerance},
                       {"budget_seconds", c.budget_seconds}});
        total += c.budget_seconds;
      }
      summary["checks"] = arr;
      summary["total_budget_seconds"] = total;
      return;
    }
    verify::SuiteOptions opt;
    opt.seed = g.seed;
    bool found = false, all_ok = true;
    json results = json::array();
    for (const auto& c : checks) {
      if (which != "all" && which != c.id && which != std::to_string(c.number)) continue;
      found = true;
      const auto r = verify::run_check(c, opt);
      std::cerr << verify::format_line(c, r) << std::endl;
      for (const auto& [name, content] : r.artifacts) write_artifact(c.id + "_" + name, content);
      results.push_back({{"id", c.id}, {"passed", r.passed}, {"detail", r.detail}});
      all_ok = all_ok && r.passed;
    }
    require(found, "verify: unknown check '" + which + "'");
    summary["results"] = results;
    summary["all_passed"] = all_ok;
    if (!all_ok) status = kExitNumeric;
  });
  return 0;
}

// --config file.json: {"command": ["cone", "scan"], "params": {...}, "seed": 1, "out": "dir", "threads": 2}
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      require(i + 1 < args.size(), "--config needs a file");
      path = args[++i];
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return args;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  require(j.is_object(), "config: object expected");
  for (auto it = j.begin(); it != j.end(); ++it)
    require(it.key() == "command" || it.key() == "params" || it.key() == "seed" || it.key() == "out" || it.key() == "threads",
            "config: unknown field '" + it.key() + "'");
  require(j.contains("command"), "config: 'command' is required");
  std::vector<std::string> out;
  if (j.contains("seed")) out.insert(out.end(), {"--seed", std::to_string(j["seed"].get<std::uint64_t>())});
  if (j.contains("out")) out.insert(out.end(), {"--out", j["out"].get<std::string>()});
  if (j.contains("threads")) out.insert(out.end(), {"--threads", std::to_string(j["threads"].get<int>())});
  if (j["command"].is_string()) {
    std::stringstream ss(j["command"].get<std::string>());
    std::string w;
    while (ss >> w) out.push_back(w);
  } else {
    for (const auto& w : j["command"]) out.push_back(w.get<std::string>());
  }
  if (j.contains("params")) {
    require(j["params"].is_object(), "config: 'params' must be an object");
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
      const auto& v = it.value();
      if (v.is_boolean()) {
        if (v.get<bool>()) out.push_back("--" + it.key());
        continue;
      }
      out.push_back("--" + it.key());
      if (v.is_string()) {
        out.push_back(v.get<std::string>());
      } else if (v.is_number_integer()) {
        out.push_back(std::to_string(v.get<long long>()));
      } else if (v.is_number()) {
        out.push_back(format_double(v.get<double>()));
      } else if (v.is_array()) {
        std::string s;
        for (const auto& e : v) {
          if (!s.empty()) s += ',';
          s += e.is_number() ? format_double(e.get<double>()) : e.get<std::string>();
        }
        out.push_back(s);
      } else {
        out.push_back(v.dump());
      }
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

void emit(int code, const std::string& error = "") {
  summary["exit"] = code;
  summary["ok"] = code == 0;
  if (!error.empty()) summary["error"] = error;
  std::cout << summary.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  summary = json::object();
  summary["artifacts"] = json::array();
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(args);
  } catch (const Error& e) {
    emit(kExitInvalid, e.what());
    return kExitInvalid;
  }

  CLI::App app{"gmtlab: blow-ups, cone distances, harmonic measure and A_inf diagnostics"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--out", g.out, "artifact directory");
  app.add_option("--threads", g.threads, "worker threads (overrides GMT_LAB_THREADS)");
  app.add_option_function<std::uint64_t>("--seed", [](std::uint64_t s) {
    g.seed = s;
    g.seed_given = true;
  });
  int status = 0;
  add_polycore(app);
  add_measure(app);
  add_polymeasure(app);
  add_cone(app);
  add_wos(app);
  add_weights(app);
  add_verify(app, status);
  app.parse_complete_callback([] {
    if (g.threads > 0) set_worker_count(g.threads);
  });

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help() << std::endl;
    return 0;
  } catch (const CLI::ParseError& e) {
    emit(kExitInvalid, e.what());
    return kExitInvalid;
  } catch (const InvalidInput& e) {
    emit(kExitInvalid, e.what());
    return kExitInvalid;
  } catch (const EllipticityError& e) {
    emit(kExitInvalid, e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    emit(kExitNumeric, e.what());
    return kExitNumeric;
  }
  std::string cmd;
  for (auto* s = &app; !s->get_subcommands().empty();) {
    s = s->get_subcommands().front();
    cmd += (cmd.empty() ? "" : " ") + s->get_name();
  }
  summary["command"] = cmd;
  emit(status);
  return status;
}
