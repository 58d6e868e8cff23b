#include "mplab/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mplab/error.hpp"

namespace mplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> energies_of(const EnergyFunctional& phi, const std::vector<GridFunction>& points) {
  std::vector<double> e(points.size(), 0.0);
  kernels::for_each_index(points.size(), [&](std::size_t i) { e[i] = phi.energy(points[i]); });
  return e;
}

}  // namespace

GridFunction Path::at(std::size_t segment, double lambda) const {
  if (nodes.size() < 2) throw Error(ErrorKind::Domain, "path needs at least two nodes");
  if (segment >= segments()) throw Error(ErrorKind::Domain, "path segment out of range");
  if (lambda <= 0.0) return nodes[segment];
  if (lambda >= 1.0) return nodes[segment + 1];
  const auto& a = nodes[segment];
  const auto& b = nodes[segment + 1];
  return {a.domain, (1.0 - lambda) * a.values + lambda * b.values};
}

GridFunction Path::at(double t) const {
  const double m = static_cast<double>(segments());
  const double x = std::clamp(t, 0.0, 1.0) * m;
  const std::size_t j = std::min(static_cast<std::size_t>(x), segments() - 1);
  return at(j, x - static_cast<double>(j));
}

void validate_path(const EnergyFunctional& phi, const Path& path) {
  if (path.nodes.size() < 2) throw Error(ErrorKind::Geometry, "a path needs at least two nodes");
  for (const auto& node : path.nodes)
    if (node.domain != phi.domain()) throw Error(ErrorKind::Domain, "path node on a foreign domain");
  if (!(path.nodes.front().values.array() == 0.0).all())
    throw Error(ErrorKind::Geometry, "path must start at 0");
  if (!(phi.energy(path.nodes.back()) < 0.0))
    throw Error(ErrorKind::Geometry, "path must end where the energy is negative");
}

Path make_initial_path(const EnergyFunctional& phi, const GridFunction& direction, int m, int max_doublings) {
  if (m < 1) throw Error(ErrorKind::Config, "path needs m >= 1 segments");
  if (direction.domain != phi.domain()) throw Error(ErrorKind::Domain, "direction on a foreign domain");
  if (!(h1_norm(direction) > 0.0)) throw Error(ErrorKind::Geometry, "path direction must be nonzero");
  double scale = 1.0;
  bool found = false;
  for (int k = 0; k <= max_doublings; ++k, scale *= 2.0) {
    const GridFunction end{direction.domain, scale * direction.values};
    if (!end.all_finite()) break;
    double e = 0.0;
    try {
      e = phi.energy(end);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::Numeric) throw;
      break;
    }
    if (e < 0.0) {
      found = true;
      break;
    }
  }
  if (!found)
    throw Error(ErrorKind::Geometry,
                "no admissible endpoint: energy stays nonnegative along the direction (functional is not "
                "mountain-pass shaped for it)");
  Path path;
  path.nodes.reserve(static_cast<std::size_t>(m) + 1);
  path.nodes.push_back(GridFunction::zeros(direction.domain));
  for (int j = 1; j <= m; ++j)
    path.nodes.push_back({direction.domain, (scale * j / m) * direction.values});
  return path;
}

PathSup path_sup(const EnergyFunctional& phi, const Path& path, bool refine, int samples) {
  if (path.nodes.empty()) throw Error(ErrorKind::Domain, "empty path");
  const std::size_t m = path.segments();
  const std::vector<double> node_e = energies_of(phi, path.nodes);
  PathSup best;
  best.value = -kInf;
  for (std::size_t j = 0; j < node_e.size(); ++j) {
    if (node_e[j] > best.value) {
      best.value = node_e[j];
      best.segment = j;
      best.lambda = 0.0;
    }
  }
  if (best.segment == m && m > 0) {
    best.segment = m - 1;
    best.lambda = 1.0;
  }
  if (refine && m > 0 && samples >= 2) {
    const std::size_t per = static_cast<std::size_t>(samples - 1);
    std::vector<double> e(m * per, 0.0);
    kernels::for_each_index(e.size(), [&](std::size_t i) {
      const std::size_t j = i / per;
      const double lambda = static_cast<double>(i % per + 1) / samples;
      e[i] = phi.energy(path.at(j, lambda));
    });
    // Per-segment best among nodes and interior samples.
    std::vector<std::pair<double, double>> seg(m);  // (value, lambda)
    for (std::size_t j = 0; j < m; ++j) {
      seg[j] = {node_e[j], 0.0};
      for (std::size_t k = 0; k < per; ++k)
        if (e[j * per + k] > seg[j].first) seg[j] = {e[j * per + k], static_cast<double>(k + 1) / samples};
      if (node_e[j + 1] > seg[j].first) seg[j] = {node_e[j + 1], 1.0};
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return seg[a].first > seg[b].first; });
    const std::size_t polish = std::min<std::size_t>(2, m);
    for (std::size_t r = 0; r < polish; ++r) {
      const std::size_t j = order[r];
      double lo = std::max(0.0, seg[j].second - 1.0 / samples);
      double hi = std::min(1.0, seg[j].second + 1.0 / samples);
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
      double f1 = phi.energy(path.at(j, x1)), f2 = phi.energy(path.at(j, x2));
      for (int it = 0; it < 40; ++it) {
        if (f1 >= f2) {
          hi = x2; x2 = x1; f2 = f1;
          x1 = hi - g * (hi - lo);
          f1 = phi.energy(path.at(j, x1));
        } else {
          lo = x1; x1 = x2; f1 = f2;
          x2 = lo + g * (hi - lo);
          f2 = phi.energy(path.at(j, x2));
        }
      }
      if (f1 > seg[j].first) seg[j] = {f1, x1};
      if (f2 > seg[j].first) seg[j] = {f2, x2};
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (seg[j].first > best.value) {
        best.value = seg[j].first;
        best.segment = j;
        best.lambda = seg[j].second;
      }
    }
  }
  best.t = m > 0 ? (static_cast<double>(best.segment) + best.lambda) / static_cast<double>(m) : 0.0;
  return best;
}

double path_distance(const GridFunction& u, const Path& path) {
  double best = kInf;
  if (path.nodes.size() == 1) return h1_distance(u, path.nodes.front());
  for (std::size_t j = 0; j + 1 < path.nodes.size(); ++j) {
    const GridFunction ab{u.domain, path.nodes[j + 1].values - path.nodes[j].values};
    const GridFunction au{u.domain, u.values - path.nodes[j].values};
    const double len2 = h1_inner(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(h1_inner(au, ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, h1_norm({u.domain, au.values - t * ab.values}));
  }
  return best;
}

double max_spacing(const Path& path) {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < path.nodes.size(); ++j)
    s = std::max(s, h1_distance(path.nodes[j + 1], path.nodes[j]));
  return s;
}

namespace {

Path reparameterize(const Path& path) {
  const std::size_t m = path.segments();
  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) cum[j + 1] = cum[j] + h1_distance(path.nodes[j + 1], path.nodes[j]);
  const double total = cum[m];
  if (!(total > 0.0)) return path;
  Path out;
  out.nodes.reserve(m + 1);
  out.nodes.push_back(path.nodes.front());
  std::size_t k = 0;
  for (std::size_t i = 1; i < m; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(m);
    while (k + 1 < m && cum[k + 1] < target) ++k;
    const double len = cum[k + 1] - cum[k];
    const double lambda = len > 0.0 ? std::clamp((target - cum[k]) / len, 0.0, 1.0) : 0.0;
    out.nodes.push_back(path.at(k, lambda));
  }
  out.nodes.push_back(path.nodes.back());
  return out;
}

}  // namespace

OptimizeResult optimize_path(const EnergyFunctional& phi, const Path& path, const OptimizeOptions& options) {
  validate_path(phi, path);
  const std::size_t m = path.segments();
  OptimizeResult out;
  out.path = path;

  double mean_spacing = 0.0;
  for (std::size_t j = 0; j < m; ++j) mean_spacing += h1_distance(path.nodes[j + 1], path.nodes[j]);
  mean_spacing /= static_cast<double>(m);
  const double budget = options.step_budget > 0.0 ? options.step_budget : 0.25 * mean_spacing;

  auto trace_entry = [&](const Path& p, const PathSup& s) {
    const std::size_t top = s.lambda < 0.5 ? s.segment : s.segment + 1;
    return OptimizeTrace{s.value, phi.slope(p.nodes[top])};
  };

  PathSup sup = path_sup(phi, out.path, true, options.sup_samples);
  out.trace.push_back(trace_entry(out.path, sup));
  double alpha = options.time_step;
  int flat = 0;

  for (int it = 0; it < options.iters && m >= 2; ++it) {
    Path moved = out.path;
    kernels::for_each_index(m - 1, [&](std::size_t k) {
      const std::size_t j = k + 1;
      const GridFunction& x = out.path.nodes[j];
      const GridFunction tangent{x.domain, out.path.nodes[j + 1].values - out.path.nodes[j - 1].values};
      const double tn2 = h1_inner(tangent, tangent);
      const GradientInfo g = phi.gradient_info(x);
      Eigen::VectorXd normal = g.riesz.values;
      if (tn2 > 0.0) normal -= (h1_inner(g.riesz, tangent) / tn2) * tangent.values;
      const double nn = h1_norm({x.domain, normal});
      if (!(nn > 0.0)) return;
      double step = std::min(alpha, budget / nn);
      const double e0 = phi.energy(x);
      for (int h = 0; h < 12; ++h, step *= 0.5) {
        GridFunction trial{x.domain, x.values - step * normal};
        if (phi.energy(trial) <= e0) {
          moved.nodes[j] = std::move(trial);
          return;
        }
      }
    });

    bool accepted = false;
    std::vector<Path> candidates;
    if (options.reparameterize) candidates.push_back(reparameterize(moved));
    candidates.push_back(std::move(moved));
    for (auto& cand : candidates) {
      const PathSup s = path_sup(phi, cand, true, options.sup_samples);
      if (s.value <= sup.value) {
        const double gain = sup.value - s.value;
        flat = gain <= options.stagnation_tol * std::max(1.0, std::abs(sup.value)) ? flat + 1 : 0;
        out.path = std::move(cand);
        sup = s;
        accepted = true;
        break;
      }
    }
    if (accepted) {
      ++out.accepted;
      out.trace.push_back(trace_entry(out.path, sup));
      alpha = std::min(1.25 * alpha, 4.0);
      if (flat >= options.stagnation_window) {
        out.stagnated = true;
        break;
      }
    } else {
      ++out.rejected;
      alpha *= 0.5;
      if (alpha < 1e-12) {
        out.stagnated = true;
        break;
      }
    }
  }
  return out;
}

std::string_view to_string(ShadowStatus s) {
  switch (s) {
    case ShadowStatus::Certified: return "certified";
    case ShadowStatus::LevelCollapse: return "level_collapse";
    case ShadowStatus::HypothesisFailure: return "hypothesis_failure";
    case ShadowStatus::PreconditionFailure: return "precondition_failure";
  }
  return "hypothesis_failure";
}

namespace {

constexpr double kSlack = 1e-10;

InequalityCheck upper_check(std::string name, double measured, double upper, bool strict) {
  InequalityCheck c{std::move(name), measured, -kInf, upper, strict, false};
  const double limit = upper + kSlack * std::abs(upper);
  c.ok = strict ? measured < limit : measured <= limit;
  return c;
}

InequalityCheck band_check(std::string name, double measured, double lower, double upper) {
  InequalityCheck c{std::move(name), measured, lower, upper, false, false};
  c.ok = measured >= lower - kSlack * std::abs(lower) && measured <= upper + kSlack * std::abs(upper);
  return c;
}

constexpr int kRefineLevels = 12;

struct Sample {
  std::size_t segment = 0;
  double lambda = 0.0;
  GridFunction point;
  double energy = 0.0;
  DeformResult tilde;
  GridFunction hat;
  double hat_energy = 0.0;

  Sample(std::size_t segment, double lambda, GridFunction point, double energy)
      : segment(segment), lambda(lambda), point(std::move(point)), energy(energy) {}

  double param() const { return static_cast<double>(segment) + lambda; }
};

}  // namespace

CertificateReport validate_certificate(const EnergyFunctional& phi, const ShadowCertificate& cert) {
  const double c = cert.c_hat, eps = cert.epsilon, delta = cert.delta;
  const HalfSpace H = make_halfspace(phi.domain(), cert.halfspace);
  CertificateReport r;
  r.checks[0] = band_check("a.1 phi(u) in [c-2eps, c+2eps]", phi.energy(cert.u), c - 2 * eps, c + 2 * eps);
  r.checks[1] = band_check("a.2 phi(v) in [c-2eps, c+2eps]", phi.energy(cert.v), c - 2 * eps, c + 2 * eps);
  r.checks[2] = upper_check("b.1 ||u-w|| <= 3 delta", h1_distance(cert.u, cert.w), 3 * delta, false);
  r.checks[3] = upper_check("b.2 dist(w, gamma) <= delta", path_distance(cert.w, cert.path), delta, false);
  r.checks[4] = upper_check("b.3 ||v-Psi(w)|| <= 2 delta", h1_distance(cert.v, polarize(cert.w, H)), 2 * delta, false);
  r.checks[5] = upper_check("c.1 slope(u) < 8 eps/delta", phi.slope(cert.u), 8 * eps / delta, true);
  r.checks[6] = upper_check("c.2 slope(v) < 8 eps/delta", phi.slope(cert.v), 8 * eps / delta, true);
  r.valid = std::all_of(r.checks.begin(), r.checks.end(), [](const InequalityCheck& c) { return c.ok; });
  return r;
}

ShadowResult shadow_extract(const EnergyFunctional& phi, const Path& path, const HalfSpace& H,
                            const ShadowConfig& config) {
  validate_path(phi, path);
  if (H.domain() != phi.domain()) throw Error(ErrorKind::Domain, "half-space on a foreign domain");
  if (!H.preserves_domain())
    throw Error(ErrorKind::Incompatible, "shadow extraction needs sigma_H(Omega) = Omega");

  ShadowResult result;
  result.c_hat = config.c_hat;
  result.path = path;
  const double eps = config.epsilon;
  const double delta = config.delta;
  const double a = config.a_level;
  const double bound = 8.0 * eps / delta;

  for (int attempt = 0;; ++attempt) {
    const double c = result.c_hat;
    const Path& gamma = result.path;
    const std::size_t m = gamma.segments();
    if (!(eps > 0.0) || !(delta > 0.0) || !(eps < 0.5 * (c - a))) {
      std::ostringstream os;
      os << "need 0 < eps < (c - a)/2: eps = " << eps << ", c = " << c << ", a = " << a;
      result.status = ShadowStatus::PreconditionFailure;
      result.diagnostics = os.str();
      return result;
    }
    const PathSup top = path_sup(phi, gamma, true, config.samples);
    if (top.value > c + eps + kSlack * std::abs(c)) {
      std::ostringstream os;
      os << "path sup " << top.value << " exceeds c + eps = " << c + eps;
      result.status = ShadowStatus::PreconditionFailure;
      result.diagnostics = os.str();
      return result;
    }

    // Parameter samples: every node, plus interior points on segments that
    // reach the band, plus the refined maximiser.
    std::vector<Sample> samples;
    const std::vector<double> node_e = energies_of(phi, gamma.nodes);
    for (std::size_t j = 0; j < m; ++j) {
      samples.emplace_back(j, 0.0, gamma.nodes[j], node_e[j]);
      const double reach = std::max({node_e[j], node_e[j + 1], phi.energy(gamma.at(j, 0.5))});
      if (reach >= c - 2.0 * eps) {
        for (int k = 1; k < config.samples; ++k) {
          const double lambda = static_cast<double>(k) / config.samples;
          samples.emplace_back(j, lambda, gamma.at(j, lambda), 0.0);
        }
      }
      if (j == top.segment && top.lambda > 0.0 && top.lambda < 1.0)
        samples.emplace_back(j, top.lambda, gamma.at(j, top.lambda), 0.0);
    }
    samples.emplace_back(m - 1, 1.0, gamma.nodes[m], node_e[m]);
    std::stable_sort(samples.begin(), samples.end(),
                     [](const Sample& x, const Sample& y) { return x.param() < y.param(); });
    kernels::for_each_index(samples.size(),
                            [&](std::size_t i) { samples[i].energy = phi.energy(samples[i].point); });

    // eta is fixed once: S is anchored at the in-band samples of gamma.
    DeformationParams first{c, eps, delta, {}};
    for (const auto& s : samples)
      if (s.energy >= c - 2.0 * eps && s.energy <= c + 2.0 * eps) first.region.push_back(s.point);

    // gamma~ = eta o gamma and gamma^ = Psi o gamma~ at the samples; Psi
    // must not raise the energy.
    auto evaluate = [&](std::vector<Sample>& batch) {
      kernels::for_each_index(batch.size(), [&](std::size_t i) {
        Sample& s = batch[i];
        s.energy = phi.energy(s.point);
        s.tilde = deform(phi, s.point, first);
        s.hat = polarize(s.tilde.eta, H);
        s.hat_energy = phi.energy(s.hat);
      });
      for (const auto& s : batch) {
        if (s.hat_energy > s.tilde.energy_out + 1e-12 * std::max(1.0, std::abs(s.tilde.energy_out)))
          throw Error(ErrorKind::Geometry, "phi(Psi(x)) > phi(x) on the path: the functional is not "
                                           "compatible with polarization in " + H.spec().str());
      }
    };
    evaluate(samples);
    if (!(samples.front().hat.values.array() == 0.0).all() || !(samples.back().hat_energy < 0.0))
      throw Error(ErrorKind::Geometry, "polarized path left Gamma");

    // gamma^ is a path in Gamma, so its sup is at least c. When no sample
    // exceeds c - eps the top lies between samples: bisect the parameter
    // wherever the chord through neighbouring samples rises above c - eps.
    auto any_high = [&] {
      return std::any_of(samples.begin(), samples.end(), [&](const Sample& s) { return s.hat_energy > c - eps; });
    };
    for (int level = 0; level < kRefineLevels && !any_high(); ++level) {
      std::vector<Sample> added;
      for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const Sample& lo = samples[i];
        const Sample& hi = samples[i + 1];
        double chord = -kInf;
        for (double lambda : {0.25, 0.5, 0.75})
          chord = std::max(chord, phi.energy({lo.hat.domain, (1.0 - lambda) * lo.hat.values + lambda * hi.hat.values}));
        if (chord > c - eps) {
          const double mid = 0.5 * (lo.param() + hi.param());
          const std::size_t seg = std::min(static_cast<std::size_t>(mid), m - 1);
          const double lambda = mid - static_cast<double>(seg);
          added.emplace_back(seg, lambda, gamma.at(seg, lambda), 0.0);
        }
      }
      if (added.empty()) break;
      evaluate(added);
      for (auto& s : added) samples.push_back(std::move(s));
      std::stable_sort(samples.begin(), samples.end(),
                       [](const Sample& x, const Sample& y) { return x.param() < y.param(); });
    }
    const std::size_t ns = samples.size();

    std::vector<std::size_t> high;
    for (std::size_t i = 0; i < ns; ++i)
      if (samples[i].hat_energy > c - eps) high.push_back(i);

    if (high.empty()) {
      // sup phi o gamma^ <= c - eps with gamma^ in Gamma: c_hat overestimates
      // the level. Re-estimate on the polarized sample path and retry.
      Path next;
      for (const auto& s : samples) next.nodes.push_back(s.hat);
      const PathSup next_top = path_sup(phi, next, true, config.samples);
      std::ostringstream os;
      os << "level collapse: polarized path sup " << next_top.value << " <= c - eps = " << c - eps;
      result.diagnostics = os.str();
      if (attempt >= config.max_collapse_retries || !(next_top.value < c)) {
        result.status = ShadowStatus::LevelCollapse;
        return result;
      }
      ++result.collapse_retries;
      result.c_hat = next_top.value;
      result.path = std::move(next);
      continue;
    }

    // eta^ with S^ = gamma^(M) cut to [c - eps/2, c + eps]; its low-slope
    // witnesses are the v candidates.
    DeformationParams second{c, eps, delta, {}};
    for (const auto& s : samples)
      if (s.hat_energy >= c - 0.5 * eps && s.hat_energy <= c + eps) second.region.push_back(s.hat);
    std::vector<DeformResult> hat_eta(high.size());
    kernels::for_each_index(high.size(),
                            [&](std::size_t k) { hat_eta[k] = deform(phi, samples[high[k]].hat, second); });

    std::vector<std::size_t> order(high.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return samples[high[x]].hat_energy > samples[high[y]].hat_energy;
    });

    std::ostringstream misses;
    for (std::size_t k : order) {
      const Sample& s = samples[high[k]];
      const double t = s.param() / static_cast<double>(m);
      std::vector<GridFunction> v_candidates;
      if (hat_eta[k].witness) v_candidates.push_back(*hat_eta[k].witness);
      auto v = low_slope_search(phi, s.hat, c, eps, 2.0 * delta, bound, v_candidates);
      if (!v) {
        misses << " t=" << t << ": no v (min slope seen " << hat_eta[k].min_slope << ");";
        continue;
      }
      std::vector<GridFunction> u_candidates;
      if (s.tilde.witness) u_candidates.push_back(*s.tilde.witness);
      auto u = low_slope_search(phi, s.point, c, eps, 2.0 * delta, bound, u_candidates);
      if (!u) {
        misses << " t=" << t << ": no u (min slope seen " << s.tilde.min_slope << ");";
        continue;
      }
      ShadowCertificate cert;
      cert.u = std::move(*u);
      cert.v = std::move(*v);
      cert.w = s.tilde.eta;
      cert.c_hat = c;
      cert.epsilon = eps;
      cert.delta = delta;
      cert.t_star = t;
      cert.path = gamma;
      cert.halfspace = H.spec();
      cert.inequalities = validate_certificate(phi, cert);
      if (!cert.inequalities.valid) {
        misses << " t=" << t << ": certificate failed re-validation;";
        continue;
      }
      result.status = ShadowStatus::Certified;
      result.certificate = std::move(cert);
      result.diagnostics.clear();
      return result;
    }
    result.status = ShadowStatus::HypothesisFailure;
    result.diagnostics = "no low-slope pair found near the high part of the polarized path:" + misses.str();
    return result;
  }
}

MountainPassReport mountain_pass_symmetric(const EnergyFunctional& phi, const HalfSpace& H,
                                           const GridFunction& direction, const MountainPassConfig& config) {
  if (!H.preserves_domain())
    throw Error(ErrorKind::Incompatible, "symmetric mountain pass needs sigma_H(Omega) = Omega");
  MountainPassReport rep;
  Path gamma = make_initial_path(phi, direction, config.m);
  rep.s = config.s > 0.0 ? config.s : max_spacing(gamma);
  const double a = 0.0;  // max(phi(0), phi(gamma(1))) with phi(gamma(1)) < 0
  double c_hat = path_sup(phi, gamma, true, config.samples).value;

  int iteration = 0;
  auto run_optimizer = [&](const OptimizeOptions& opts) {
    OptimizeResult opt = optimize_path(phi, gamma, opts);
    gamma = std::move(opt.path);
    for (std::size_t k = 1; k < opt.trace.size(); ++k) {
      c_hat = std::min(c_hat, opt.trace[k].sup);
      rep.trace.push_back({++iteration, opt.trace[k].sup, c_hat, opt.trace[k].slope_top});
    }
    c_hat = std::min(c_hat, path_sup(phi, gamma, true, config.samples).value);
  };
  rep.trace.push_back({0, c_hat, c_hat, phi.slope(gamma.nodes[path_sup(phi, gamma).segment])});

  run_optimizer(config.first_round);
  int n0 = config.n0;
  if (n0 <= 0) {
    n0 = 1;
    while (!(1.0 / (static_cast<double>(n0) * n0) < 0.5 * (c_hat - a))) ++n0;
  }

  std::optional<GridFunction> previous;
  GridFunction best = GridFunction::zeros(phi.domain());
  bool have_best = false;
  for (int n = n0; n <= config.n_max; ++n) {
    if (n > n0) run_optimizer(config.later_rounds);
    RoundRecord rec;
    rec.n = n;
    rec.epsilon = 1.0 / (static_cast<double>(n) * n);
    rec.delta = rep.s / n;
    rec.c_hat = c_hat;
    rec.path_sup = path_sup(phi, gamma, true, config.samples).value;
    if (!(rec.epsilon < 0.5 * (c_hat - a))) {
      rec.status = ShadowStatus::PreconditionFailure;
      rep.rounds.push_back(rec);
      continue;
    }
    ShadowResult sh = shadow_extract(phi, gamma, H, {c_hat, a, rec.epsilon, rec.delta, config.samples, 4});
    rec.status = sh.status;
    if (sh.collapse_retries > 0) {
      gamma = sh.path;
      c_hat = sh.c_hat;
      rec.c_hat = c_hat;
    }
    if (sh.status != ShadowStatus::Certified) {
      rep.rounds.push_back(rec);
      continue;
    }
    ShadowCertificate& cert = *sh.certificate;
    if (!validate_certificate(phi, cert).valid)
      throw Error(ErrorKind::Solver, "certificate failed independent re-validation");
    rec.slope_u = phi.slope(cert.u);
    rec.slope_v = phi.slope(cert.v);
    NewtonResult refined = newton_refine(phi, cert.u);
    rec.slope_refined = refined.slope;
    rec.cauchy = previous ? h1_distance(refined.u, *previous) : kInf;
    rep.dist_bound = 3.0 * rec.delta;
    rep.rounds.push_back(rec);
    rep.certificates.push_back(std::move(cert));
    best = refined.u;
    have_best = true;
    const bool done = refined.slope <= config.tol_slope && rec.cauchy <= config.tol_cauchy;
    previous = std::move(refined.u);
    if (done) {
      rep.converged = true;
      break;
    }
  }
  if (!have_best) throw Error(ErrorKind::Solver, "no shadowing certificate produced within the schedule budget");

  rep.u = best;
  rep.uH = polarize(rep.u, H);
  rep.c_hat = c_hat;
  rep.energy_u = phi.energy(rep.u);
  rep.energy_uH = phi.energy(rep.uH);
  rep.slope_u = phi.slope(rep.u);
  rep.slope_uH = phi.slope(rep.uH);
  rep.path = gamma;
  rep.dist_to_path = path_distance(rep.u, gamma);
  rep.defect = symmetry_defect(rep.u, H.spec().direction);
  rep.defect_all = symmetry_defect(rep.u);
  return rep;
}

}  // namespace mplab
