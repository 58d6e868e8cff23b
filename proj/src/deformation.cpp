#include "mplab/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mplab/error.hpp"

namespace mplab {

double band_cutoff(double energy, double c, double epsilon) {
  const double lo = (energy - (c - 2.0 * epsilon)) / epsilon;
  const double hi = ((c + 2.0 * epsilon) - energy) / epsilon;
  return std::clamp(std::min(lo, hi), 0.0, 1.0);
}

double region_cutoff(double distance, double delta) {
  return std::clamp((2.0 * delta - distance) / delta, 0.0, 1.0);
}

double distance_to_region(const GridFunction& u, const std::vector<GridFunction>& region) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : region) best = std::min(best, h1_distance(u, a));
  return best;
}

DeformResult deform(const EnergyFunctional& phi, const GridFunction& u, const DeformationParams& params) {
  if (!(params.epsilon > 0.0) || !(params.delta > 0.0))
    throw Error(ErrorKind::Config, "deform: epsilon and delta must be positive");
  const double c = params.c;
  const double eps = params.epsilon;
  const double delta = params.delta;
  const double bound = params.slope_bound();

  DeformResult out;
  out.energy_in = phi.energy(u);
  out.eta = u;
  out.energy_out = out.energy_in;
  out.min_slope = std::numeric_limits<double>::infinity();

  const bool in_band = out.energy_in >= c - 2.0 * eps && out.energy_in <= c + 2.0 * eps;
  if (!in_band || !(distance_to_region(u, params.region) < 2.0 * delta)) {
    out.identity = true;
    return out;
  }

  GridFunction x = u;
  double ex = out.energy_in;
  double tau = 0.0;
  double travelled = 0.0;
  double dt = delta / 16.0;
  const int max_steps = 100000;

  while (tau < delta && out.steps < max_steps) {
    const double rho = band_cutoff(ex, c, eps) * region_cutoff(distance_to_region(x, params.region), delta);
    if (rho <= 0.0) break;
    const GradientInfo g = phi.gradient_info(x);
    out.min_slope = std::min(out.min_slope, g.slope);
    if (g.slope < bound && (!out.witness || g.slope < out.witness_slope)) {
      out.witness = x;
      out.witness_slope = g.slope;
    }
    if (g.slope == 0.0) break;

    // Unit speed where the hypothesis slope >= 8 eps / delta holds; below it
    // the speed shrinks with the slope so the field stays Lipschitz and
    // critical points are fixed.
    const double speed = std::min(1.0, g.slope / bound);
    const double scale = std::max(1.0, h1_norm(x));
    bool accepted = false;
    while (true) {
      // At most eps/4 of predicted energy drop per step, so the cutoffs are
      // resolved and eta follows the cutoff flow rather than jumping the band.
      const double step_t = std::min({dt, delta - tau, 0.25 * eps / (g.slope * rho * speed)});
      const double len = std::min(rho * speed * step_t, delta - travelled);
      if (len <= 1e-14 * scale) break;
      GridFunction trial{x.domain, x.values - (len / g.slope) * g.riesz.values};
      const double et = phi.energy(trial);
      // Armijo with coefficient 1/2: if the slope stays >= 8 eps / delta the
      // energy drops by >= 4 eps over unit-speed flow time delta, which is
      // what turns property (ii) into a dichotomy.
      if (et <= ex - 0.5 * len * g.slope) {
        x = std::move(trial);
        ex = et;
        tau += step_t;
        travelled += len;
        ++out.steps;
        dt = std::min(1.5 * dt, 0.25 * delta);
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) {
      if (tau < delta && travelled < delta) out.underflow = true;
      break;
    }
  }

  out.flow_time = tau;
  out.displacement = h1_distance(x, u);
  if (out.displacement > delta) {
    // Rounding in the per-step norms; pull back onto the sphere of radius delta.
    GridFunction pulled{u.domain, u.values + (delta / out.displacement) * (x.values - u.values)};
    const double ep = phi.energy(pulled);
    if (ep <= out.energy_in) {
      x = std::move(pulled);
      ex = ep;
      out.displacement = h1_distance(x, u);
    }
  }
  out.eta = std::move(x);
  out.energy_out = ex;
  return out;
}

std::optional<GridFunction> low_slope_search(const EnergyFunctional& phi, const GridFunction& u0, double c,
                                             double epsilon, double radius, double slope_bound,
                                             const std::vector<GridFunction>& candidates) {
  if (!(radius > 0.0) || !(slope_bound > 0.0))
    throw Error(ErrorKind::Config, "low_slope_search: radius and slope bound must be positive");

  struct Hit {
    double slope = std::numeric_limits<double>::infinity();
    std::optional<GridFunction> point;
  };
  auto admissible = [&](const GridFunction& x, Hit& best) {
    if (!x.all_finite()) return;
    const double e = phi.energy(x);
    if (e < c - 2.0 * epsilon || e > c + 2.0 * epsilon) return;
    if (h1_distance(x, u0) > radius) return;
    const double s = phi.slope(x);
    if (s < slope_bound && s < best.slope) {
      best.slope = s;
      best.point = x;
    }
  };

  Hit direct;
  admissible(u0, direct);
  if (direct.point) return direct.point;

  Hit newton;
  for (const auto& x : newton_refine(phi, u0).iterates) admissible(x, newton);
  if (newton.point) return newton.point;

  Hit given;
  for (const auto& x : candidates) admissible(x, given);
  if (given.point) return given.point;

  Hit descent;
  const DescentResult d = descend(phi, u0, radius, slope_bound, 20000);
  admissible(d.u, descent);
  return descent.point;
}

}  // namespace mplab
