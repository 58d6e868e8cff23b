#pragma once

// Paths in Gamma = { gamma : gamma(0) = 0, phi(gamma(1)) < 0 }, path
// optimisation toward the mountain-pass level, the shadowing extraction of
// a (u, v, w) triple and the symmetric mountain-pass driver.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mplab/deformation.hpp"
#include "mplab/polarization.hpp"

namespace mplab {

/// Piecewise-linear path through m+1 nodes at t_j = j/m.
struct Path {
  std::vector<GridFunction> nodes;

  std::size_t segments() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  /// Point on segment j at local parameter lambda in [0, 1].
  GridFunction at(std::size_t segment, double lambda) const;
  /// Point at global parameter t in [0, 1].
  GridFunction at(double t) const;
};

/// Throws ErrorKind::Geometry unless nodes[0] == 0 exactly and
/// phi(nodes.back()) < 0.
void validate_path(const EnergyFunctional& phi, const Path& path);

/// nodes[j] = (j/m) S direction, with S the first power of two for which
/// phi(S direction) < 0.
Path make_initial_path(const EnergyFunctional& phi, const GridFunction& direction, int m,
                       int max_doublings = 60);

struct PathSup {
  double value = 0.0;
  std::size_t segment = 0;  // node index when lambda == 0
  double lambda = 0.0;
  double t = 0.0;           // global parameter (segment + lambda) / m
};

/// Max of phi over the nodes (lowest index on ties). With refine, also over
/// `samples` points per segment, polished by golden-section search on the
/// best segments.
PathSup path_sup(const EnergyFunctional& phi, const Path& path, bool refine = false, int samples = 8);

/// H^1 distance from u to the polygonal path (segment projections).
double path_distance(const GridFunction& u, const Path& path);
double max_spacing(const Path& path);

struct OptimizeOptions {
  int iters = 200;
  double step_budget = 0.0;    // max H^1 move per node and iteration; 0 = 1/4 mean spacing
  double time_step = 0.5;      // initial Sobolev-gradient time step
  bool reparameterize = true;
  int stagnation_window = 25;
  double stagnation_tol = 1e-13;
  int sup_samples = 8;
};

struct OptimizeTrace {
  double sup = 0.0;
  double slope_top = 0.0;  // slope at the node with the highest energy
};

struct OptimizeResult {
  Path path;
  std::vector<OptimizeTrace> trace;  // one entry per accepted iteration, start included
  int accepted = 0;
  int rejected = 0;
  bool stagnated = false;
};

/// String-method descent: every interior node follows the component of the
/// Sobolev gradient normal to the path, then the path is redistributed by
/// H^1 arc length. Iterations that would raise the refined path sup are
/// rejected, so path_sup is non-increasing; endpoints never move.
OptimizeResult optimize_path(const EnergyFunctional& phi, const Path& path, const OptimizeOptions& options = {});

struct InequalityCheck {
  std::string name;
  double measured = 0.0;
  double lower = 0.0;   // -inf when one-sided
  double upper = 0.0;
  bool strict = false;  // measured < upper instead of <=
  bool ok = false;
};

struct CertificateReport {
  std::array<InequalityCheck, 7> checks;
  bool valid = false;
};

struct ShadowCertificate {
  GridFunction u, v, w;
  double c_hat = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double t_star = 0.0;
  Path path;
  HalfSpaceSpec halfspace;
  CertificateReport inequalities;
};

struct ShadowConfig {
  double c_hat = 0.0;
  double a_level = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  int samples = 8;  // parameter samples per segment near the top of the path
  int max_collapse_retries = 4;
};

enum class ShadowStatus { Certified, LevelCollapse, HypothesisFailure, PreconditionFailure };
std::string_view to_string(ShadowStatus s);

struct ShadowResult {
  ShadowStatus status = ShadowStatus::HypothesisFailure;
  std::optional<ShadowCertificate> certificate;
  std::string diagnostics;
  int collapse_retries = 0;
  double c_hat = 0.0;  // level actually used (re-estimated after a collapse)
  Path path;           // path actually used
};

/// Runs the shadowing argument on gamma: deform, polarize, locate a high
/// point of the polarized path carrying a low-slope point v nearby, then a
/// low-slope point u near the original path at the same parameter.
ShadowResult shadow_extract(const EnergyFunctional& phi, const Path& path, const HalfSpace& H,
                            const ShadowConfig& config);

/// Recomputes all seven inequalities from the stored functions.
CertificateReport validate_certificate(const EnergyFunctional& phi, const ShadowCertificate& cert);

struct MountainPassConfig {
  int m = 32;
  OptimizeOptions first_round{};       // path optimisation before the first extraction
  OptimizeOptions later_rounds{50};    // and between later extractions
  int n0 = 0;                          // 0: smallest n with 1/n^2 < (c_hat - a)/2
  int n_max = 40;
  double s = 0.0;                      // delta_n = s/n; 0: max spacing of the initial path
  double tol_slope = 1e-6;
  double tol_cauchy = 1e-6;
  int samples = 8;
};

struct RoundRecord {
  int n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double c_hat = 0.0;
  double path_sup = 0.0;
  ShadowStatus status = ShadowStatus::HypothesisFailure;
  double slope_u = 0.0;
  double slope_v = 0.0;
  double slope_refined = 0.0;
  double cauchy = 0.0;  // ||u_n - u_{n-1}|| after Newton refinement
};

struct TraceRow {
  int iteration = 0;
  double sup = 0.0;
  double c_hat = 0.0;
  double slope = 0.0;
};

struct MountainPassReport {
  GridFunction u, uH;
  double c_hat = 0.0;
  double energy_u = 0.0;
  double energy_uH = 0.0;
  double slope_u = 0.0;
  double slope_uH = 0.0;
  double dist_to_path = 0.0;
  double dist_bound = 0.0;  // 3 delta of the last certified round
  double defect = 0.0;      // symmetry_defect(u, mirror of H)
  double defect_all = 0.0;  // over every symmetric half-space
  double s = 0.0;
  bool converged = false;
  Path path;
  std::vector<RoundRecord> rounds;
  std::vector<ShadowCertificate> certificates;
  std::vector<TraceRow> trace;
};

/// Symmetric mountain-pass driver with eps_n = 1/n^2 and delta_n = s/n.
/// Requires sigma_H(Omega) = Omega.
MountainPassReport mountain_pass_symmetric(const EnergyFunctional& phi, const HalfSpace& H,
                                           const GridFunction& direction, const MountainPassConfig& config);

}  // namespace mplab
