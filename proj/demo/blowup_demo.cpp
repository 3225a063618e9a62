// Blow-ups at the origin: the polynomial measure of xy, the zero set of
// y - x^2 (tangent line at 0), and harmonic measure on both sides of a
// half-plane boundary.

#include <cstdio>
#include <vector>

#include "gmtlab/cone.hpp"
#include "gmtlab/polymeasure.hpp"
#include "gmtlab/polynomial_parser.hpp"
#include "gmtlab/stochastic.hpp"
#include "gmtlab/weights.hpp"

using namespace gmtlab;

int main() {
  const auto id = ConstantEllipticMatrix::identity(2);
  const std::vector<double> radii{1.0, 0.5, 0.25};

  const auto xy = sample_polymeasure(parse_polynomial("x*y", 2), id, 1.0, 800);
  std::printf("omega_xy: F_1 = %.4f (exact 2/3)\n", f_r(xy, 1.0));

  ConeOptions quick;
  quick.starts = 8;
  quick.refine = 2;
  const auto flat = ConeSpec::parse("flat", 2, id);
  const auto f2 = ConeSpec::parse("F2", 2, id);
  for (double r : radii)
    std::printf("  r=%-5g d(flat)=%.4f d(F2)=%.4f\n", r, cone_distance(xy, flat, r, quick).value,
                cone_distance(xy, f2, r, quick).value);

  const auto parabola = sample_polymeasure(parse_polynomial("y - x^2", 2), id, 1.0, 800);
  std::printf("zero set of y - x^2, blow-ups at 0 against the flat cone:\n");
  for (const auto& row : scale_scan(parabola, Point{}, flat, radii, quick))
    std::printf("  r=%-5g d1=%.4f\n", row.r, row.d1);

  WalkConfig cfg;
  cfg.n_walks = 50000;
  cfg.seed = 7;
  BlowupOptions opt;
  opt.radii = radii;
  const auto upper = halfspace_domain(2, Point{0.0, 1.0}, 0.0);
  const auto lower = halfspace_domain(2, Point{0.0, -1.0}, 0.0);
  const auto rep = blowup_experiment(upper, lower, Point{0.0, 1.0}, Point{1.0, -1.0}, Point{}, opt, cfg);
  std::printf("half-plane, poles (0,1) and (1,-1):\n");
  for (const auto& row : rep.rows)
    std::printf("  r=%-5g w+=%.4f w-=%.4f ratio=%.3f +- %.3f K=%.4f osc=%.4f\n", row.r, row.mass_plus, row.mass_minus,
                row.ratio.value_or(0.0), row.ratio_stderr.value_or(0.0), row.k.value_or(0.0), row.osc.value_or(0.0));
  const auto recipe = hru_recipe(2.0);
  std::printf("doubling C=2: alpha=%.4f delta=%.4g\n", recipe.alpha, recipe.delta);
  return 0;
}
