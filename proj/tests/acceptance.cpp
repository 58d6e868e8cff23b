// Acceptance runner: one PASS/FAIL line per criterion. With no arguments
// every criterion runs; otherwise only the listed numbers. Exit status is
// nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "mplab/cli.hpp"
#include "mplab/io.hpp"
#include "mplab/minimax.hpp"
#include "support.hpp"

using namespace mplab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

GridFunction tilted_bump(const DomainPtr& d) {
  return GridFunction::sample(d, [&](double x, double y) {
    const double b = d->dim() == 2 ? (1 - y * y) * (1 + 0.3 * y) : 1.0;
    return (1 - x * x) * (1 + 0.6 * x) * b;
  });
}

// 1. Polarization suite on 33x33.
Outcome polarization_suite() {
  const auto t0 = Clock::now();
  const DomainPtr d = build_domain(Shape::Square, 33, 2.0);
  std::vector<HalfSpace> family;
  for (const char* s : {"x<=0", "y>=0", "d+<=0", "d->=0", "x<=0.25", "y>=-0.3125", "x>=-0.03125", "d+<=0.125"})
    family.push_back(make_halfspace(d, s));
  std::mt19937_64 rng(20240601);
  long long equi = 0, idem = 0, order = 0, nonexp = 0, ps = 0;
  double worst_nonexp = 0.0, worst_ps = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const GridFunction u = support::random_nonnegative(d, rng);
    const GridFunction w = support::random_nonnegative(d, rng);
    const GridFunction v{d, u.values.cwiseMax(w.values)};
    const auto su = support::sorted_values(u);
    const double uu = h1_inner(u, u), dist = l2_distance(u, w);
    for (const HalfSpace& H : family) {
      const GridFunction uH = polarize(u, H), vH = polarize(v, H), wH = polarize(w, H);
      if (support::sorted_values(uH) != su) ++equi;
      if (polarize(uH, H).values != uH.values) ++idem;
      if (!(uH.values.array() <= vH.values.array()).all()) ++order;
      const double dh = l2_distance(uH, wH);
      if (dist > 0) worst_nonexp = std::max(worst_nonexp, (dh - dist) / dist);
      if (dh > dist * (1 + 1e-12)) ++nonexp;
      const double eh = h1_inner(uH, uH);
      worst_ps = std::max(worst_ps, (eh - uu) / uu);
      if (eh > uu * (1 + 1e-12)) ++ps;
    }
  }
  const double secs = since(t0);
  Outcome o;
  o.pass = equi == 0 && idem == 0 && order == 0 && nonexp == 0 && ps == 0 && secs < 30.0;
  o.detail = "80000 pairs; violations equi=" + std::to_string(equi) + " idem=" + std::to_string(idem) +
             " order=" + std::to_string(order) + " L2=" + std::to_string(nonexp) + " PS=" + std::to_string(ps) +
             fmt("; worst L2 excess %.2e", worst_nonexp) + fmt(", PS excess %.2e", worst_ps) + fmt("; %.1f s", secs);
  return o;
}

// 2. Random polarization passes toward u*.
Outcome brock_solynin() {
  const auto t0 = Clock::now();
  const DomainPtr d = build_domain(Shape::Square, 33, 2.0);
  int close = 0;
  bool monotone = true;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GridFunction u0 = io::random_nonnegative(d, seed);
    const RandomPassResult r = random_polarization_pass(u0, seed, 500);
    for (std::size_t j = 1; j < r.distances.size(); ++j) monotone = monotone && r.distances[j] <= r.distances[j - 1];
    const double ratio = r.distances.front() > 0 ? r.distances.back() / r.distances.front() : 0.0;
    worst = std::max(worst, ratio);
    if (ratio <= 0.01) ++close;
  }
  const double secs = since(t0);
  Outcome o;
  o.pass = monotone && close >= 18 && secs < 60.0;
  o.detail = std::string("monotone=") + (monotone ? "yes" : "no") + "; " + std::to_string(close) +
             "/20 seeds with ||u_500-u*|| <= 1% of ||u_0-u*||" + fmt("; worst ratio %.3f", worst) +
             fmt("; %.1f s", secs);
  return o;
}

// 3. Deformation contracts.
Outcome deformation_contracts() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const DomainPtr d = build_domain(Shape::Interval, 33, 2.0);
  const EnergyFunctional phi(d, Nonlinearity::power(4.0));
  int identity_bad = 0, disp_bad = 0, energy_bad = 0, identity_cases = 0;
  for (int k = 0; k < 1000; ++k) {
    const GridFunction u = support::random_function(d, rng, -0.5, 1.5);
    const GridFunction anchor{d, u.values + (k % 3) * 0.1 * support::random_function(d, rng).values};
    const double e = phi.energy(u);
    const double eps = 0.01 + 0.2 * U(rng), delta = 0.05 + 0.5 * U(rng);
    const double c = e + (U(rng) - 0.5) * 6 * eps;
    const DeformResult r = deform(phi, u, {c, eps, delta, {anchor}});
    const bool outside = e < c - 2 * eps || e > c + 2 * eps || distance_to_region(u, {anchor}) >= 2 * delta;
    if (outside) {
      ++identity_cases;
      if (r.eta.values != u.values) ++identity_bad;
    }
    if (h1_distance(r.eta, u) > delta * (1 + 1e-12)) ++disp_bad;
    if (phi.energy(r.eta) > e) ++energy_bad;
  }
  // Property (ii) on the quadratic: slope = ||u|| >= 8 eps / delta throughout.
  const DomainPtr d2 = build_domain(Shape::Square, 17, 2.0);
  const EnergyFunctional quad(d2, Nonlinearity::zero());
  GridFunction u0 = tilted_bump(d2);
  u0.values *= 2.0 / h1_norm(u0);
  int drop_bad = 0;
  double worst_excess = -1.0;
  for (double c : {2.0, 1.99, 1.97, 1.96}) {
    const double eps = 0.05, delta = 0.5;
    const DeformResult r = deform(quad, u0, {c, eps, delta, {u0}});
    worst_excess = std::max(worst_excess, r.energy_out - (c - eps));
    if (r.witness || r.energy_out > c - eps + 1e-10 * std::abs(c)) ++drop_bad;
  }
  o.pass = identity_bad == 0 && disp_bad == 0 && energy_bad == 0 && drop_bad == 0;
  o.detail = "1000 inputs (" + std::to_string(identity_cases) + " identity cases): identity=" +
             std::to_string(identity_bad) + " displacement=" + std::to_string(disp_bad) +
             " energy=" + std::to_string(energy_bad) + " violations; quadratic drop failures=" +
             std::to_string(drop_bad) + fmt(", max phi(eta)-(c-eps) = %.3e", worst_excess);
  return o;
}

// 4. Shadowing certificate in 1D.
Outcome shadow_certificate() {
  const auto t0 = Clock::now();
  const DomainPtr d = build_domain(Shape::Interval, 129, 2.0);
  const EnergyFunctional phi(d, Nonlinearity::power(4.0));
  const HalfSpace H = make_halfspace(d, "x<=0");
  const Path p = optimize_path(phi, make_initial_path(phi, tilted_bump(d), 32), {200}).path;
  const double c = path_sup(phi, p, true).value;
  const ShadowResult r = shadow_extract(phi, p, H, {c, 0.0, 1e-3, 0.1, 8, 4});
  const double secs = since(t0);
  Outcome o;
  o.detail = std::string("status ") + std::string(to_string(r.status));
  if (!r.certificate) {
    o.pass = false;
    o.detail += "; " + r.diagnostics;
    return o;
  }
  const CertificateReport rep = validate_certificate(phi, *r.certificate);
  int ok = 0;
  for (const auto& ch : rep.checks) ok += ch.ok;
  o.pass = rep.valid && secs < 60.0;
  o.detail += "; " + std::to_string(ok) + "/7 inequalities" + fmt("; c_hat %.10f", r.c_hat) + fmt("; %.1f s", secs);
  return o;
}

// 5. Symmetric mountain pass, 1D and 2D.
Outcome symmetric_mountain_pass() {
  Outcome o;
  const double oracle_frozen = 1.9695066162328783;
  const support::Oracle1D fine = support::newton_oracle_1d(2049);
  {
    const auto t0 = Clock::now();
    const DomainPtr d = build_domain(Shape::Interval, 129, 2.0);
    const EnergyFunctional phi(d, Nonlinearity::power(4.0));
    const MountainPassReport rep = mountain_pass_symmetric(phi, make_halfspace(d, "x<=0"), tilted_bump(d), {});
    const double secs = since(t0);
    const double rel = std::abs(rep.c_hat - fine.energy) / fine.energy;
    const bool ok = std::abs(rep.energy_u - rep.energy_uH) <= 1e-8 && rep.slope_u <= 1e-6 && rep.slope_uH <= 1e-5 &&
                    rep.defect <= 1e-6 && rel <= 1e-3 && std::abs(fine.energy - oracle_frozen) <= 1e-12 &&
                    secs < 300.0;
    o.pass = o.pass && ok;
    o.detail += std::string("1D ") + (ok ? "ok" : "FAILED") + fmt(": c_hat %.10f", rep.c_hat) +
                fmt(" (oracle %.10f,", fine.energy) + fmt(" rel %.1e)", rel) + fmt(", slope %.1e", rep.slope_u) +
                fmt(", slope(uH) %.1e", rep.slope_uH) + fmt(", |dphi| %.1e", std::abs(rep.energy_u - rep.energy_uH)) +
                fmt(", defect %.1e", rep.defect) + fmt(", %.1f s", secs);
  }
  {
    const auto t0 = Clock::now();
    const DomainPtr d = build_domain(Shape::Square, 33, 2.0);
    const EnergyFunctional phi(d, Nonlinearity::power(4.0));
    const MountainPassReport rep = mountain_pass_symmetric(phi, make_halfspace(d, "x<=0"), tilted_bump(d), {});
    const double secs = since(t0);
    const bool ok = rep.slope_u <= 1e-4 && std::abs(rep.energy_u - rep.energy_uH) <= 1e-6 &&
                    rep.energy_uH <= rep.energy_u + 1e-12 * rep.energy_u && rep.defect_all <= 1e-3 && secs < 600.0;
    o.pass = o.pass && ok;
    o.detail += std::string("; 2D ") + (ok ? "ok" : "FAILED") + fmt(": c_hat %.8f", rep.c_hat) +
                fmt(", slope %.1e", rep.slope_u) + fmt(", |dphi| %.1e", std::abs(rep.energy_u - rep.energy_uH)) +
                fmt(", defect %.1e", rep.defect_all) + fmt(", %.1f s", secs);
  }
  return o;
}

// 6. Directional derivative against central differences.
Outcome gradient_consistency() {
  std::mt19937_64 rng(606);
  const DomainPtr d = build_domain(Shape::Square, 17, 2.0);
  const double lambda1 = first_dirichlet_eigen(d).value;
  const std::vector<std::pair<std::string, Nonlinearity>> kinds = {
      {"zero", Nonlinearity::zero()},
      {"power4", Nonlinearity::power(4.0)},
      {"power3", Nonlinearity::power(3.0)},
      {"scaled_power", Nonlinearity::scaled_power(0.5 * lambda1, 4.0)}};
  double worst = 0.0;
  int bad = 0;
  for (const auto& [name, nl] : kinds) {
    const EnergyFunctional phi(d, nl);
    for (int k = 0; k < 20; ++k) {
      const GridFunction u = support::random_function(d, rng, -1.5, 1.5);
      const GridFunction z = support::random_function(d, rng);
      const double s = 1e-6;
      const double fd = (phi.energy({d, u.values + s * z.values}) - phi.energy({d, u.values - s * z.values})) / (2 * s);
      const double exact = phi.differential(u, z);
      const double rel = std::abs(fd - exact) / std::max(std::abs(exact), 1e-300);
      worst = std::max(worst, rel);
      if (rel > 1e-5) ++bad;
    }
  }
  return {bad == 0, "80 pairs over 4 kinds" + fmt("; worst relative error %.2e", worst)};
}

bool same_json(const json& a, const json& b, const std::string& where, std::string& first_diff) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)})) return true;
    first_diff = where;
    return false;
  }
  if (a.type() != b.type() || a.size() != b.size()) {
    first_diff = where;
    return false;
  }
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) {
        first_diff = where + "." + it.key();
        return false;
      }
      if (!same_json(*it, b.at(it.key()), where + "." + it.key(), first_diff)) return false;
    }
    return true;
  }
  if (a.is_array()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!same_json(a[i], b[i], where + "[" + std::to_string(i) + "]", first_diff)) return false;
    return true;
  }
  if (a != b) first_diff = where;
  return a == b;
}

// 7. Determinism of the CLI, with different worker counts.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("mplab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "config.json") << R"({
  "domain": {"shape": "square", "n": 33, "extent": 2.0},
  "nonlinearity": {"kind": "power", "p": 4},
  "halfspace": "x<=0",
  "path": {"m": 16, "iters": 100, "later_iters": 25, "direction": "random"},
  "seed": 2024
})";
  Outcome o;
  std::vector<fs::path> dirs;
  for (const char* threads : {"1", "4"}) {
    ::setenv("MPLAB_THREADS", threads, 1);
    const fs::path out = root / (std::string("run_") + threads);
    std::ostringstream so, se;
    const int code = cli::run({"solve", (root / "config.json").string(), {}, out.string(), {}, {}}, so, se);
    if (code != cli::kExitOk) {
      o.pass = false;
      o.detail = "solve exited " + std::to_string(code) + ": " + se.str();
      fs::remove_all(root);
      return o;
    }
    dirs.push_back(out);
  }
  ::unsetenv("MPLAB_THREADS");
  int csv = 0, csv_same = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    if (entry.path().extension() != ".csv") continue;
    ++csv;
    csv_same += io::read_file(entry.path()) == io::read_file(dirs[1] / entry.path().filename());
  }
  json a = json::parse(io::read_file(dirs[0] / "report.json"));
  json b = json::parse(io::read_file(dirs[1] / "report.json"));
  a.erase("timing");
  b.erase("timing");
  std::string diff;
  const bool reports = same_json(a, b, "report", diff);
  o.pass = reports && csv > 0 && csv_same == csv;
  o.detail = "threads 1 vs 4: " + std::to_string(csv_same) + "/" + std::to_string(csv) + " CSV files identical; report " +
             (reports ? "identical to 1e-12" : "differs at " + diff);
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"polarization suite", polarization_suite},
      {"Brock-Solynin approximation", brock_solynin},
      {"deformation contracts", deformation_contracts},
      {"shadowing certificate", shadow_certificate},
      {"symmetric mountain pass", symmetric_mountain_pass},
      {"gradient consistency", gradient_consistency},
      {"determinism", determinism}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);
  bool all = true;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    const auto& [name, fn] = criteria[static_cast<std::size_t>(k - 1)];
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    all = all && r.pass;
    std::printf("%s criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", k, name.c_str(), r.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
