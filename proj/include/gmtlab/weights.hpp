#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gmtlab/error.hpp"
#include "gmtlab/measure.hpp"

namespace gmtlab {

struct WeightCell {
  double mu_mass = 0.0;
  double nu_mass = 0.0;
};

/// A ball cut into cells carrying the masses of mu and nu. The density
/// f = d nu / d mu is taken constant on each cell.
struct WeightPanel {
  std::vector<WeightCell> cells;
  Ball ball{};

  void validate() const {
    require(!cells.empty(), "WeightPanel: no cells");
    double m = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      require(std::isfinite(c.mu_mass) && c.mu_mass >= 0.0 && std::isfinite(c.nu_mass) && c.nu_mass >= 0.0,
              "WeightPanel: cell " + std::to_string(i) + " has a negative or non-finite mass");
      m += c.mu_mass;
    }
    require(m > 0.0, "WeightPanel: total mu_mass must be positive");
  }

  double mu_total() const {
    double s = 0.0;
    for (const auto& c : cells) s += c.mu_mass;
    return s;
  }

  double nu_total() const {
    double s = 0.0;
    for (const auto& c : cells) s += c.nu_mass;
    return s;
  }

  /// Cells where nu charges a mu-null cell.
  std::vector<std::size_t> ac_violations() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i].mu_mass == 0.0 && cells[i].nu_mass > 0.0) out.push_back(i);
    return out;
  }

  WeightPanel nu_scaled(double t) const {
    require(t > 0.0 && std::isfinite(t), "WeightPanel::nu_scaled: factor must be positive");
    WeightPanel p = *this;
    for (auto& c : p.cells) c.nu_mass *= t;
    return p;
  }
};

namespace detail {

struct LogDensity {
  std::vector<double> w;  // mu_mass / M over cells with mu_mass > 0
  std::vector<double> g;  // log f on those cells
  double mean_f = 0.0;    // mu-average of f
  double mean_g = 0.0;
};

inline LogDensity log_density(const WeightPanel& p) {
  p.validate();
  LogDensity d;
  const double m = p.mu_total();
  double nu = 0.0;
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    const auto& c = p.cells[i];
    if (c.mu_mass == 0.0) continue;
    if (c.nu_mass == 0.0)
      throw LogDivergence("log f diverges on cell " + std::to_string(i) + " (nu_mass = 0, mu_mass > 0)");
    d.w.push_back(c.mu_mass / m);
    d.g.push_back(std::log(c.nu_mass) - std::log(c.mu_mass));
    nu += c.nu_mass;
  }
  d.mean_f = nu / m;
  for (std::size_t i = 0; i < d.w.size(); ++i) d.mean_g += d.w[i] * d.g[i];
  return d;
}

}  // namespace detail

/// K = (avg f) * exp(-avg log f), averages against mu over the panel.
inline double a_inf_quantity(const WeightPanel& panel) {
  const auto d = detail::log_density(panel);
  const double k = std::exp(std::log(d.mean_f) - d.mean_g);
  if (k < 1.0) {
    if (k < 1.0 - 1e-12) throw SolverError("a_inf_quantity: K < 1 beyond rounding");
    return 1.0;
  }
  return k;
}

/// Mean oscillation of log f against mu.
inline double bmo_oscillation(const WeightPanel& panel) {
  const auto d = detail::log_density(panel);
  double s = 0.0;
  for (std::size_t i = 0; i < d.w.size(); ++i) s += d.w[i] * std::abs(d.g[i] - d.mean_g);
  return s;
}

struct KoreyCheck {
  double osc = 0.0;
  double k = 1.0;
  double bound = 0.0;  // log 2K
  bool satisfied = false;
  /// osc / sqrt(K - 1); empty when K == 1.
  std::optional<double> sqrt_ratio;
};

inline KoreyCheck korey_check(const WeightPanel& panel) {
  KoreyCheck r;
  r.osc = bmo_oscillation(panel);
  r.k = a_inf_quantity(panel);
  r.bound = std::log(2.0 * r.k);
  r.satisfied = r.osc <= r.bound;
  if (r.k > 1.0) r.sqrt_ratio = r.osc / std::sqrt(r.k - 1.0);
  return r;
}

struct HruResult {
  double delta = 0.0;
  /// sup nu(F)/nu(B) over fractional cell selections with mu(F)/mu(B) <= delta.
  double fractional = 0.0;
  /// Same over unions of whole cells.
  double integral = 0.0;
  /// False when the cell count was too large for exhaustive search and
  /// `integral` is only the greedy lower bound.
  bool integral_exact = true;
  double gap() const { return fractional - integral; }
};

inline constexpr std::size_t kHruExactCells = 16;

inline HruResult hru_moduli(const WeightPanel& panel, double delta) {
  panel.validate();
  require(delta > 0.0 && delta < 1.0, "hru_moduli: delta must lie in (0, 1)");
  const auto& cells = panel.cells;
  const double m = panel.mu_total();
  const double nu = panel.nu_total();
  require(nu > 0.0, "hru_moduli: total nu_mass must be positive");
  const double budget = delta * m;

  // Density order, mu-null cells first (they cost nothing).
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto dens = [&](std::size_t i) {
    return cells[i].mu_mass == 0.0 ? HUGE_VAL : cells[i].nu_mass / cells[i].mu_mass;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dens(a) > dens(b); });

  HruResult r;
  r.delta = delta;
  double left = budget, frac = 0.0, greedy = 0.0, gleft = budget;
  for (std::size_t i : order) {
    const auto& c = cells[i];
    if (left > 0.0 || c.mu_mass == 0.0) {
      const double take = c.mu_mass <= left ? 1.0 : left / c.mu_mass;
      frac += take * c.nu_mass;
      left -= take * c.mu_mass;
    }
    if (c.mu_mass <= gleft) {
      greedy += c.nu_mass;
      gleft -= c.mu_mass;
    }
  }
  r.fractional = std::min(1.0, frac / nu);

  if (cells.size() <= kHruExactCells) {
    const std::size_t n = cells.size();
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      double mm = 0.0, vv = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) {
          mm += cells[i].mu_mass;
          vv += cells[i].nu_mass;
        }
      if (mm <= budget) best = std::max(best, vv);
    }
    r.integral = best / nu;
  } else {
    r.integral = greedy / nu;
    r.integral_exact = false;
  }
  return r;
}

/// The threshold from the proof of the Hruscev estimate for a panel with
/// A_inf constant c > 1: alpha solves c^((1+a)/(1-a)) - 1 = 2(c-1), and delta
/// is the largest value below alpha with |d log d + (1-d) log(1-d)| < alpha log c,
/// shrunk by `margin` to keep the inequalities strict.
struct HruRecipe {
  double c = 1.0;
  double alpha = 0.0;
  double delta = 0.0;
  double bound = 0.0;  // 2(c - 1)
};

inline HruRecipe hru_recipe(double c, double margin = 0.99) {
  require(c > 1.0 && std::isfinite(c), "hru_recipe: constant must exceed 1");
  HruRecipe r;
  r.c = c;
  const double q = std::log(2.0 * c - 1.0) / std::log(c);
  r.alpha = (q - 1.0) / (q + 1.0);
  const double target = r.alpha * std::log(c);
  auto phi = [](double d) { return -(d * std::log(d) + (1.0 - d) * std::log1p(-d)); };
  double lo = 0.0, hi = std::min(0.5, r.alpha);
  if (phi(hi) < target) {
    lo = hi;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) < target ? lo : hi) = mid;
    }
  }
  r.delta = margin * lo;
  r.bound = 2.0 * (c - 1.0);
  return r;
}

/// Right-hand side e^(eta/delta)/(1-eps) of the BMO + A_inf' bound on K.
inline double afincafin_bound(double eta, double delta, double eps) {
  require(delta > 0.0 && delta < 1.0 && eps >= 0.0 && eps < 1.0 && eta >= 0.0, "afincafin_bound: bad arguments");
  return std::exp(eta / delta) / (1.0 - eps);
}

struct VaRow {
  double r = 0.0;
  double k = 1.0;
  double osc = 0.0;
};

struct VaProfile {
  std::vector<VaRow> rows;
  bool vanishing = false;
};

/// K and osc on panels over shrinking balls. The profile counts as vanishing
/// when K - 1 at the smallest radius is within abs_tol of zero or at most half
/// its value at the largest radius.
inline VaProfile va_inf_scan(const std::vector<WeightPanel>& panels, double abs_tol = 1e-3) {
  require(!panels.empty(), "va_inf_scan: no panels");
  VaProfile p;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    if (i > 0)
      require(panels[i].ball.radius < panels[i - 1].ball.radius, "va_inf_scan: radii must decrease");
    p.rows.push_back({panels[i].ball.radius, a_inf_quantity(panels[i]), bmo_oscillation(panels[i])});
  }
  const double first = p.rows.front().k - 1.0, last = p.rows.back().k - 1.0;
  p.vanishing = last <= std::max(abs_tol, 0.5 * first);
  return p;
}

inline std::string panel_to_csv(const WeightPanel& p) {
  std::ostringstream os;
  os.precision(17);
  os << "cell_id,mu_mass,nu_mass\n";
  for (std::size_t i = 0; i < p.cells.size(); ++i) os << i << ',' << p.cells[i].mu_mass << ',' << p.cells[i].nu_mass << '\n';
  return os.str();
}

inline WeightPanel panel_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  WeightPanel p;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("cell_id", 0) == 0) continue;
    std::istringstream ls(line);
    std::string id, a, b;
    if (!std::getline(ls, id, ',') || !std::getline(ls, a, ',') || !std::getline(ls, b))
      throw InvalidInput("panel csv line " + std::to_string(lineno) + ": expected cell_id,mu_mass,nu_mass");
    try {
      std::size_t u = 0, v = 0;
      const double mu = std::stod(a, &u), nu = std::stod(b, &v);
      if (u != a.size() || v != b.size()) throw std::invalid_argument("trailing");
      p.cells.push_back({mu, nu});
    } catch (const std::exception&) {
      throw InvalidInput("panel csv line " + std::to_string(lineno) + ": bad number");
    }
  }
  p.validate();
  return p;
}

inline std::string profile_to_csv(const VaProfile& p) {
  std::ostringstream os;
  os.precision(17);
  os << "r,K,osc\n";
  for (const auto& row : p.rows) os << row.r << ',' << row.k << ',' << row.osc << '\n';
  return os.str();
}

}  // namespace gmtlab
