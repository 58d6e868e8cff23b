#pragma once

// Experiment configuration, function files and JSON reports.
//
// Function files are CSV: a `# domain: <shape> <n> <extent>` line, a column
// header, then one `index,x[,y],value` row per interior node (global index,
// 17 significant digits). Boundary and exterior nodes are omitted and read
// back as zero.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mplab/minimax.hpp"

namespace mplab::io {

using nlohmann::json;

struct DomainConfig {
  Shape shape = Shape::Interval;
  int n = 129;
  double extent = 2.0;
};

struct NonlinearityConfig {
  Nonlinearity::Kind kind = Nonlinearity::Kind::Power;
  double p = 4.0;
  double lambda = 0.0;
};

struct PathConfig {
  int m = 32;
  int iters = 200;        // optimiser iterations before the first extraction
  int later_iters = 50;   // between later extractions
  int samples = 8;
  std::string direction = "bump";  // bump | eigen | random
};

struct ScheduleConfig {
  int n0 = 0;
  int n_max = 40;
  double s = 0.0;
};

struct ShadowBlock {
  double epsilon = 1e-3;
  double delta = 0.1;
};

struct ToleranceConfig {
  double slope = 1e-6;
  double cauchy = 1e-6;
};

struct RearrangeConfig {
  int steps = 500;
};

struct OutputConfig {
  std::string dir = "out";
  std::string report = "report.json";
  std::string trace = "trace.csv";
  std::string u = "u.csv";
  std::string uH = "uH.csv";
};

struct ExperimentConfig {
  DomainConfig domain;
  NonlinearityConfig nonlinearity;
  std::string halfspace = "x<=0";
  PathConfig path;
  ScheduleConfig schedule;
  ShadowBlock shadow;
  ToleranceConfig tolerances;
  RearrangeConfig rearrange;
  std::uint64_t seed = 0;
  OutputConfig output;
};

/// Parses and validates a JSON config. Unknown keys and out-of-range
/// values are rejected with the field path; syntax errors with line and
/// column. `source` names the input in messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Effective configuration, defaults included.
json to_json(const ExperimentConfig& config);

DomainPtr make_domain(const DomainConfig& config);
Nonlinearity make_nonlinearity(const NonlinearityConfig& config);
/// Initial path direction on the domain; `random` draws from the seed.
GridFunction make_direction(const DomainPtr& domain, const std::string& kind, std::uint64_t seed);
/// A smooth nonnegative function built from seeded random bumps.
GridFunction random_nonnegative(const DomainPtr& domain, std::uint64_t seed);

std::string format_double(double x);

std::string function_csv(const GridFunction& u);
/// Reads a function file; the domain is rebuilt from its header.
GridFunction parse_function_csv(const std::string& text, const std::string& source = "<csv>");
GridFunction read_function_csv(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

json function_json(const GridFunction& u);
GridFunction function_from_json(const DomainPtr& domain, const json& values, const std::string& field);

json certificate_json(const ShadowCertificate& cert);
ShadowCertificate certificate_from_json(const DomainPtr& domain, const json& j);

std::string trace_csv(const std::vector<TraceRow>& rows);

/// Machine-readable error object {"error": {"kind", "message"}}.
json error_json(const std::exception& e);

}  // namespace mplab::io
