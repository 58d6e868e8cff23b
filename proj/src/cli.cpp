#include "mplab/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>

#include "mplab/error.hpp"
#include "mplab/io.hpp"
#include "mplab/kernels.hpp"

namespace mplab::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

struct Context {
  io::ExperimentConfig config;
  fs::path out_dir;
};

Context load(const Options& o) {
  Context ctx;
  if (o.config) ctx.config = io::load_config(*o.config);
  if (o.seed) ctx.config.seed = *o.seed;
  if (o.halfspace) {
    parse_halfspace(*o.halfspace);
    ctx.config.halfspace = *o.halfspace;
  }
  ctx.out_dir = o.out ? fs::path(*o.out) : fs::path(ctx.config.output.dir);
  return ctx;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json header(const std::string& command, const Context& ctx) {
  return {{"command", command}, {"config", io::to_json(ctx.config)}, {"seed", ctx.config.seed}};
}

void write_report(const Context& ctx, const json& report) {
  io::write_atomic(ctx.out_dir / ctx.config.output.report, report.dump(2) + "\n");
}

json round_json(const RoundRecord& r) {
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"n", r.n},
          {"epsilon", r.epsilon},
          {"delta", r.delta},
          {"c_hat", r.c_hat},
          {"path_sup", r.path_sup},
          {"status", to_string(r.status)},
          {"slope_u", r.slope_u},
          {"slope_v", r.slope_v},
          {"slope_refined", r.slope_refined},
          {"cauchy", num(r.cauchy)}};
}

json trace_json(const std::vector<TraceRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) a.push_back({r.iteration, r.sup, r.c_hat, r.slope});
  return a;
}

int solve(const Context& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& c = ctx.config;
  const DomainPtr domain = io::make_domain(c.domain);
  const EnergyFunctional phi(domain, io::make_nonlinearity(c.nonlinearity));
  const HalfSpace H = make_halfspace(domain, c.halfspace);
  const GridFunction direction = io::make_direction(domain, c.path.direction, c.seed);

  MountainPassConfig mp;
  mp.m = c.path.m;
  mp.first_round.iters = c.path.iters;
  mp.first_round.sup_samples = c.path.samples;
  mp.later_rounds.iters = c.path.later_iters;
  mp.later_rounds.sup_samples = c.path.samples;
  mp.n0 = c.schedule.n0;
  mp.n_max = c.schedule.n_max;
  mp.s = c.schedule.s;
  mp.tol_slope = c.tolerances.slope;
  mp.tol_cauchy = c.tolerances.cauchy;
  mp.samples = c.path.samples;
  const MountainPassReport rep = mountain_pass_symmetric(phi, H, direction, mp);

  json rounds = json::array();
  for (const auto& r : rep.rounds) rounds.push_back(round_json(r));
  json certs = json::array();
  for (const auto& cert : rep.certificates) certs.push_back(io::certificate_json(cert));

  json report = header("solve", ctx);
  report["result"] = {{"c_hat", rep.c_hat},
                      {"energy_u", rep.energy_u},
                      {"energy_uH", rep.energy_uH},
                      {"slope_u", rep.slope_u},
                      {"slope_uH", rep.slope_uH},
                      {"symmetry_defect", rep.defect},
                      {"symmetry_defect_all", rep.defect_all},
                      {"dist_to_path", rep.dist_to_path},
                      {"dist_bound", rep.dist_bound},
                      {"s", rep.s},
                      {"converged", rep.converged}};
  report["rounds"] = rounds;
  report["trace"] = trace_json(rep.trace);
  report["certificates"] = certs;
  report["u"] = io::function_json(rep.u);
  report["uH"] = io::function_json(rep.uH);
  report["iterations"] = {{"rounds", rep.rounds.size()}, {"optimizer", rep.trace.empty() ? 0 : rep.trace.back().iteration}};
  report["timing"] = {{"wall_seconds", seconds_since(t0)}, {"threads", kernels::configure_threads()}};

  io::write_atomic(ctx.out_dir / c.output.u, io::function_csv(rep.u));
  io::write_atomic(ctx.out_dir / c.output.uH, io::function_csv(rep.uH));
  io::write_atomic(ctx.out_dir / c.output.trace, io::trace_csv(rep.trace));
  write_report(ctx, report);
  out << json{{"command", "solve"},
              {"converged", rep.converged},
              {"c_hat", rep.c_hat},
              {"slope_u", rep.slope_u},
              {"certificates", rep.certificates.size()},
              {"report", (ctx.out_dir / c.output.report).string()}}
             .dump()
      << "\n";
  return kExitOk;
}

int shadow(const Context& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& c = ctx.config;
  const DomainPtr domain = io::make_domain(c.domain);
  const EnergyFunctional phi(domain, io::make_nonlinearity(c.nonlinearity));
  const HalfSpace H = make_halfspace(domain, c.halfspace);
  const GridFunction direction = io::make_direction(domain, c.path.direction, c.seed);

  Path path = make_initial_path(phi, direction, c.path.m);
  OptimizeOptions opts;
  opts.iters = c.path.iters;
  opts.sup_samples = c.path.samples;
  OptimizeResult opt = optimize_path(phi, path, opts);
  const double c_hat = path_sup(phi, opt.path, true, c.path.samples).value;
  const ShadowResult sh = shadow_extract(phi, opt.path, H, {c_hat, 0.0, c.shadow.epsilon, c.shadow.delta, c.path.samples, 4});

  std::vector<TraceRow> trace;
  for (std::size_t k = 0; k < opt.trace.size(); ++k) {
    const double best = k == 0 ? opt.trace[k].sup : std::min(trace.back().c_hat, opt.trace[k].sup);
    trace.push_back({static_cast<int>(k), opt.trace[k].sup, best, opt.trace[k].slope_top});
  }

  json report = header("shadow", ctx);
  report["status"] = to_string(sh.status);
  report["diagnostics"] = sh.diagnostics;
  report["c_hat"] = sh.c_hat;
  report["collapse_retries"] = sh.collapse_retries;
  report["trace"] = trace_json(trace);
  report["certificates"] = json::array();
  if (sh.certificate) {
    report["certificates"].push_back(io::certificate_json(*sh.certificate));
    io::write_atomic(ctx.out_dir / c.output.u, io::function_csv(sh.certificate->u));
    io::write_atomic(ctx.out_dir / "v.csv", io::function_csv(sh.certificate->v));
    io::write_atomic(ctx.out_dir / "w.csv", io::function_csv(sh.certificate->w));
  }
  report["iterations"] = {{"optimizer_accepted", opt.accepted}, {"optimizer_rejected", opt.rejected}};
  report["timing"] = {{"wall_seconds", seconds_since(t0)}, {"threads", kernels::configure_threads()}};
  io::write_atomic(ctx.out_dir / c.output.trace, io::trace_csv(trace));
  write_report(ctx, report);
  out << json{{"command", "shadow"},
              {"status", to_string(sh.status)},
              {"c_hat", sh.c_hat},
              {"report", (ctx.out_dir / c.output.report).string()}}
             .dump()
      << "\n";
  return kExitOk;
}

int polarize_cmd(const Context& ctx, const Options& o, std::ostream& out) {
  if (!o.input) throw Error(ErrorKind::Config, "polarize needs --input <csv>");
  if (!o.halfspace && !o.config) throw Error(ErrorKind::Config, "polarize needs --halfspace <spec>");
  const GridFunction u = io::read_function_csv(*o.input);
  const HalfSpace H = make_halfspace(u.domain, ctx.config.halfspace);
  const GridFunction uH = polarize(u, H);
  const fs::path target = ctx.out_dir / "polarized.csv";
  io::write_atomic(target, io::function_csv(uH));
  out << json{{"command", "polarize"},
              {"halfspace", H.spec().str()},
              {"changed", uH.values != u.values},
              {"h1_norm_in", h1_norm(u)},
              {"h1_norm_out", h1_norm(uH)},
              {"output", target.string()}}
             .dump()
      << "\n";
  return kExitOk;
}

int rearrange(const Context& ctx, const Options& o, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& c = ctx.config;
  const GridFunction u =
      o.input ? io::read_function_csv(*o.input) : io::random_nonnegative(io::make_domain(c.domain), c.seed);
  const RandomPassResult pass = random_polarization_pass(u, c.seed, c.rearrange.steps);

  bool monotone = true;
  std::string trace = "step,halfspace,distance\n" + std::string("0,,") + io::format_double(pass.distances[0]) + "\n";
  for (std::size_t j = 1; j < pass.distances.size(); ++j) {
    monotone = monotone && pass.distances[j] <= pass.distances[j - 1];
    trace += std::to_string(j) + "," + pass.halfspaces[j - 1] + "," + io::format_double(pass.distances[j]) + "\n";
  }
  const double d0 = pass.distances.front();
  const double ratio = d0 > 0.0 ? pass.distances.back() / d0 : 0.0;

  io::write_atomic(ctx.out_dir / "input.csv", io::function_csv(u));
  io::write_atomic(ctx.out_dir / "rearranged.csv", io::function_csv(pass.star));
  io::write_atomic(ctx.out_dir / "polarized.csv", io::function_csv(pass.result));
  io::write_atomic(ctx.out_dir / c.output.trace, trace);
  json report = header("rearrange", ctx);
  report["steps"] = c.rearrange.steps;
  report["monotone"] = monotone;
  report["distance_initial"] = d0;
  report["distance_final"] = pass.distances.back();
  report["relative_distance"] = ratio;
  report["distances"] = pass.distances;
  report["halfspaces"] = pass.halfspaces;
  report["timing"] = {{"wall_seconds", seconds_since(t0)}, {"threads", kernels::configure_threads()}};
  write_report(ctx, report);
  out << json{{"command", "rearrange"}, {"monotone", monotone}, {"relative_distance", ratio}}.dump() << "\n";
  return kExitOk;
}

int check(const Options& o, std::ostream& out) {
  if (!o.input) throw Error(ErrorKind::Config, "check needs --input <report.json>");
  json report;
  try {
    report = json::parse(io::read_file(*o.input));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, *o.input + ": malformed report JSON at byte " + std::to_string(e.byte));
  }
  if (!report.contains("config")) throw Error(ErrorKind::Config, "report has no config echo");
  const io::ExperimentConfig cfg = io::parse_config(report.at("config").dump(), *o.input + ":config");
  const DomainPtr domain = io::make_domain(cfg.domain);
  const EnergyFunctional phi(domain, io::make_nonlinearity(cfg.nonlinearity));

  const json& certs = report.value("certificates", json::array());
  json results = json::array();
  bool all_valid = !certs.empty();
  for (std::size_t k = 0; k < certs.size(); ++k) {
    const ShadowCertificate cert = io::certificate_from_json(domain, certs[k]);
    const CertificateReport r = validate_certificate(phi, cert);
    json checks = json::array();
    for (const auto& c : r.checks) {
      json row{{"name", c.name}, {"measured", c.measured}, {"upper", c.upper}, {"ok", c.ok}};
      if (std::isfinite(c.lower)) row["lower"] = c.lower;
      checks.push_back(row);
    }
    results.push_back({{"index", k}, {"valid", r.valid}, {"checks", checks}});
    all_valid = all_valid && r.valid;
  }
  out << json{{"command", "check"}, {"valid", all_valid}, {"certificates", results}}.dump() << "\n";
  return all_valid ? kExitOk : kExitCertificateFailure;
}

}  // namespace

int run(const Options& options, std::ostream& out, std::ostream& err) {
  try {
    kernels::configure_threads();
    const std::string& cmd = options.command;
    if (cmd == "check") return check(options, out);
    const Context ctx = load(options);
    if (cmd == "solve") return solve(ctx, out);
    if (cmd == "shadow") return shadow(ctx, out);
    if (cmd == "polarize") return polarize_cmd(ctx, options, out);
    if (cmd == "rearrange") return rearrange(ctx, options, out);
    throw Error(ErrorKind::Config, "unknown subcommand '" + cmd + "'");
  } catch (const std::exception& e) {
    err << io::error_json(e).dump() << "\n";
    return kExitError;
  }
}

}  // namespace mplab::cli
