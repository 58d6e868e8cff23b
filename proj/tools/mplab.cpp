// mplab: configuration-driven runner for the mountain-pass lab.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "mplab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Symmetric mountain-pass, polarization and deformation experiments"};
  app.require_subcommand(1, 1);

  mplab::cli::Options options;
  std::string config, out, halfspace, input;
  std::uint64_t seed = 0;

  struct Spec {
    const char* name;
    const char* help;
  };
  const Spec specs[] = {
      {"solve", "Run the symmetric mountain-pass driver"},
      {"shadow", "Optimise a path and extract one shadowing certificate"},
      {"polarize", "Polarize a function file across --halfspace"},
      {"rearrange", "Schwarz rearrangement and a random polarization pass"},
      {"check", "Re-validate every certificate stored in a report (--input)"},
  };
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config, "Experiment config (JSON)");
    sub->add_option("--seed", seed, "Seed overriding the config");
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--halfspace", halfspace, "Half-space, e.g. x<=0, y>=0.25, d+<=0");
    sub->add_option("--input", input, "Function CSV (polarize, rearrange) or report JSON (check)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << nlohmann::json{{"error", {{"kind", "config"}, {"message", e.what()}}}}.dump() << "\n";
    return mplab::cli::kExitError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  options.command = sub->get_name();
  if (sub->count("--config")) options.config = config;
  if (sub->count("--seed")) options.seed = seed;
  if (sub->count("--out")) options.out = out;
  if (sub->count("--halfspace")) options.halfspace = halfspace;
  if (sub->count("--input")) options.input = input;
  return mplab::cli::run(options, std::cout, std::cerr);
}
