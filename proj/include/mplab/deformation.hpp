#pragma once

// Constructive quantitative deformation: eta is the time-delta map of the
// normalised negative-gradient flow (slowed down where the slope is below
// 8 eps / delta), switched off outside the energy band
// [c - 2 eps, c + 2 eps] and outside the 2 delta neighbourhood of a finite
// anchor set standing for S. The flow is only evaluated at the points
// handed to deform(), so eta is never materialised as a map on all of X.

#include <optional>
#include <vector>

#include "mplab/functional.hpp"

namespace mplab {

struct DeformationParams {
  double c = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<GridFunction> region;  // anchors for S

  /// 8 eps / delta: the slope the lemma's hypothesis asks for.
  double slope_bound() const { return 8.0 * epsilon / delta; }
};

struct DeformResult {
  GridFunction eta;
  bool identity = false;        // out of band or farther than 2 delta from the region
  double energy_in = 0.0;
  double energy_out = 0.0;
  double displacement = 0.0;    // ||eta(u) - u||_{H^1}
  double flow_time = 0.0;
  int steps = 0;
  bool underflow = false;
  /// A trajectory point in the band, within delta of u and 2 delta of the
  /// region, where the slope fell below 8 eps / delta. Present whenever the
  /// lemma's hypothesis failed along the realised trajectory.
  std::optional<GridFunction> witness;
  double witness_slope = 0.0;
  double min_slope = 0.0;       // smallest slope seen while the flow was active

  bool precondition_held() const { return !witness.has_value(); }
};

/// Piecewise-linear cutoffs of the deformation vector field.
double band_cutoff(double energy, double c, double epsilon);
double region_cutoff(double distance, double delta);

double distance_to_region(const GridFunction& u, const std::vector<GridFunction>& region);

/// Evaluates eta(u). Contracts:
///  (i)   eta(u) == u bit-for-bit when phi(u) is outside [c-2eps, c+2eps] or
///        dist(u, region) >= 2 delta;
///  (ii)  if u is an anchor and phi(u) <= c + eps then phi(eta(u)) <= c - eps,
///        unless a low-slope witness was recorded;
///  (iii) ||eta(u) - u|| <= delta;
///  and phi(eta(u)) <= phi(u) always.
DeformResult deform(const EnergyFunctional& phi, const GridFunction& u, const DeformationParams& params);

/// Looks for a point x with phi(x) in [c-2eps, c+2eps], ||x - u0|| <= radius
/// and slope(x) < slope_bound: u0 itself, then Newton iterates from u0 (the
/// most critical admissible one), then the supplied candidates, then a
/// steepest-descent run of length radius. Every returned point satisfies all
/// three conditions.
std::optional<GridFunction> low_slope_search(const EnergyFunctional& phi, const GridFunction& u0, double c,
                                             double epsilon, double radius, double slope_bound,
                                             const std::vector<GridFunction>& candidates = {});

}  // namespace mplab
