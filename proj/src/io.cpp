#include "mplab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <unistd.h>

#include "mplab/error.hpp"

namespace mplab::io {

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::Config, "field '" + field + "': " + message);
}

// Walks one JSON object, rejecting keys it was not asked about.
class Block {
 public:
  Block(const json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) field_error(name(key), "unknown field");
    }
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }

  int integer(const char* key, int def, long long lo, long long hi) const {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_number_integer()) field_error(name(key), "expected an integer, got " + v.dump());
    const long long x = v.get<long long>();
    if (x < lo || x > hi)
      field_error(name(key), "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
    return static_cast<int>(x);
  }

  double number(const char* key, double def, bool positive) const {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_number()) field_error(name(key), "expected a number, got " + v.dump());
    const double x = v.get<double>();
    if (!std::isfinite(x)) field_error(name(key), "must be finite");
    if (positive && !(x > 0.0)) field_error(name(key), "must be positive, got " + v.dump());
    if (!positive && x < 0.0) field_error(name(key), "must be nonnegative, got " + v.dump());
    return x;
  }

  std::string string(const char* key, std::string def) const {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_string()) field_error(name(key), "expected a string, got " + v.dump());
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
};

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Nonlinearity::Kind parse_kind(const std::string& s, const std::string& field) {
  if (s == "power") return Nonlinearity::Kind::Power;
  if (s == "scaled_power") return Nonlinearity::Kind::ScaledPower;
  if (s == "zero") return Nonlinearity::Kind::Zero;
  field_error(field, "unknown kind '" + s + "' (expected power, scaled_power or zero)");
}

double parse_double(std::string_view s, const std::string& where) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::Config, where + ": not a number: '" + std::string(s) + "'");
  return x;
}

long long parse_integer(std::string_view s, const std::string& where) {
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::Config, where + ": not an integer: '" + std::string(s) + "'");
  return x;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Config, std::string("report field '") + key + "' missing");
  const json& v = j.at(key);
  if (v.is_null()) return -std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw Error(ErrorKind::Config, std::string("report field '") + key + "' is not a number");
  return v.get<double>();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, source + ": " + line_column(text, e.byte) + ": malformed JSON");
  }
  ExperimentConfig c;
  const Block top(root, "",
                  {"domain", "nonlinearity", "halfspace", "path", "schedule", "shadow", "tolerances", "rearrange",
                   "seed", "output"});
  if (top.has("domain")) {
    const Block b(top.at("domain"), "domain", {"shape", "n", "extent"});
    try {
      c.domain.shape = parse_shape(b.string("shape", std::string(to_string(c.domain.shape))));
    } catch (const Error& e) {
      field_error("domain.shape", e.what());
    }
    c.domain.n = b.integer("n", c.domain.n, 3, 100001);
    if (c.domain.n % 2 == 0) field_error("domain.n", "must be odd, got " + std::to_string(c.domain.n));
    c.domain.extent = b.number("extent", c.domain.extent, true);
  }
  if (top.has("nonlinearity")) {
    const Block b(top.at("nonlinearity"), "nonlinearity", {"kind", "p", "lambda"});
    c.nonlinearity.kind = parse_kind(b.string("kind", "power"), "nonlinearity.kind");
    c.nonlinearity.p = b.number("p", c.nonlinearity.p, true);
    if (!(c.nonlinearity.p > 2.0)) field_error("nonlinearity.p", "must exceed 2");
    if (b.has("lambda")) {
      const json& v = b.at("lambda");
      if (!v.is_number() || !std::isfinite(v.get<double>())) field_error("nonlinearity.lambda", "expected a number");
      c.nonlinearity.lambda = v.get<double>();
    }
  }
  if (top.has("halfspace")) {
    c.halfspace = top.string("halfspace", c.halfspace);
    try {
      parse_halfspace(c.halfspace);
    } catch (const Error& e) {
      field_error("halfspace", e.what());
    }
  }
  if (top.has("path")) {
    const Block b(top.at("path"), "path", {"m", "iters", "later_iters", "samples", "direction"});
    c.path.m = b.integer("m", c.path.m, 2, 4096);
    c.path.iters = b.integer("iters", c.path.iters, 0, 10000000);
    c.path.later_iters = b.integer("later_iters", c.path.later_iters, 0, 10000000);
    c.path.samples = b.integer("samples", c.path.samples, 2, 1024);
    c.path.direction = b.string("direction", c.path.direction);
    if (c.path.direction != "bump" && c.path.direction != "eigen" && c.path.direction != "random")
      field_error("path.direction", "expected bump, eigen or random, got '" + c.path.direction + "'");
  }
  if (top.has("schedule")) {
    const Block b(top.at("schedule"), "schedule", {"n0", "n_max", "s"});
    c.schedule.n0 = b.integer("n0", c.schedule.n0, 0, 1000000);
    c.schedule.n_max = b.integer("n_max", c.schedule.n_max, 1, 1000000);
    c.schedule.s = b.number("s", c.schedule.s, false);
    if (c.schedule.n0 > c.schedule.n_max) field_error("schedule.n0", "exceeds schedule.n_max");
  }
  if (top.has("shadow")) {
    const Block b(top.at("shadow"), "shadow", {"epsilon", "delta"});
    c.shadow.epsilon = b.number("epsilon", c.shadow.epsilon, true);
    c.shadow.delta = b.number("delta", c.shadow.delta, true);
  }
  if (top.has("tolerances")) {
    const Block b(top.at("tolerances"), "tolerances", {"slope", "cauchy"});
    c.tolerances.slope = b.number("slope", c.tolerances.slope, true);
    c.tolerances.cauchy = b.number("cauchy", c.tolerances.cauchy, true);
  }
  if (top.has("rearrange")) {
    const Block b(top.at("rearrange"), "rearrange", {"steps"});
    c.rearrange.steps = b.integer("steps", c.rearrange.steps, 0, 100000000);
  }
  if (top.has("seed")) {
    const json& v = top.at("seed");
    if (!v.is_number_unsigned()) field_error("seed", "expected a nonnegative integer, got " + v.dump());
    c.seed = v.get<std::uint64_t>();
  }
  if (top.has("output")) {
    const Block b(top.at("output"), "output", {"dir", "report", "trace", "u", "uH"});
    c.output.dir = b.string("dir", c.output.dir);
    c.output.report = b.string("report", c.output.report);
    c.output.trace = b.string("trace", c.output.trace);
    c.output.u = b.string("u", c.output.u);
    c.output.uH = b.string("uH", c.output.uH);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.string());
}

json to_json(const ExperimentConfig& c) {
  return {
      {"domain", {{"shape", to_string(c.domain.shape)}, {"n", c.domain.n}, {"extent", c.domain.extent}}},
      {"nonlinearity",
       {{"kind", to_string(c.nonlinearity.kind)}, {"p", c.nonlinearity.p}, {"lambda", c.nonlinearity.lambda}}},
      {"halfspace", c.halfspace},
      {"path",
       {{"m", c.path.m},
        {"iters", c.path.iters},
        {"later_iters", c.path.later_iters},
        {"samples", c.path.samples},
        {"direction", c.path.direction}}},
      {"schedule", {{"n0", c.schedule.n0}, {"n_max", c.schedule.n_max}, {"s", c.schedule.s}}},
      {"shadow", {{"epsilon", c.shadow.epsilon}, {"delta", c.shadow.delta}}},
      {"tolerances", {{"slope", c.tolerances.slope}, {"cauchy", c.tolerances.cauchy}}},
      {"rearrange", {{"steps", c.rearrange.steps}}},
      {"seed", c.seed},
      {"output",
       {{"dir", c.output.dir},
        {"report", c.output.report},
        {"trace", c.output.trace},
        {"u", c.output.u},
        {"uH", c.output.uH}}},
  };
}

DomainPtr make_domain(const DomainConfig& config) { return build_domain(config.shape, config.n, config.extent); }

Nonlinearity make_nonlinearity(const NonlinearityConfig& config) {
  switch (config.kind) {
    case Nonlinearity::Kind::Zero: return Nonlinearity::zero();
    case Nonlinearity::Kind::Power: return Nonlinearity::power(config.p);
    case Nonlinearity::Kind::ScaledPower: return Nonlinearity::scaled_power(config.lambda, config.p);
    case Nonlinearity::Kind::Custom: break;
  }
  throw Error(ErrorKind::Config, "custom nonlinearities cannot be configured from a file");
}

GridFunction random_nonnegative(const DomainPtr& domain, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> centre(-0.35, 0.35), width(0.08, 0.3), weight(0.2, 1.0);
  struct Bump {
    double x, y, w2, a;
  };
  std::vector<Bump> bumps(4);
  const double L = domain->extent();
  for (auto& b : bumps) {
    b.x = centre(rng) * L;
    b.y = domain->dim() == 2 ? centre(rng) * L : 0.0;
    const double w = width(rng) * L;
    b.w2 = 2.0 * w * w;
    b.a = weight(rng);
  }
  return GridFunction::sample(domain, [&](double x, double y) {
    double s = 0.0;
    for (const auto& b : bumps) s += b.a * std::exp(-((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / b.w2);
    return s;
  });
}

GridFunction make_direction(const DomainPtr& domain, const std::string& kind, std::uint64_t seed) {
  if (kind == "eigen") return first_dirichlet_eigen(domain).function;
  if (kind == "random") return random_nonnegative(domain, seed);
  if (kind == "bump") {
    const double half = 0.5 * domain->extent();
    const bool two = domain->dim() == 2;
    return GridFunction::sample(domain, [&](double x, double y) {
      const double a = x / half, b = y / half;
      const double fx = (1.0 - a * a) * (1.0 + 0.6 * a);
      return two ? fx * (1.0 - b * b) * (1.0 + 0.3 * b) : fx;
    });
  }
  throw Error(ErrorKind::Config, "unknown path direction '" + kind + "'");
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string function_csv(const GridFunction& u) {
  const GridDomain& d = *u.domain;
  std::string out = "# domain: " + std::string(to_string(d.shape())) + " " + std::to_string(d.n()) + " " +
                    format_double(d.extent()) + "\n";
  out += d.dim() == 1 ? "index,x,value\n" : "index,x,y,value\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = d.coordinate(i);
    out += std::to_string(d.global_of(i));
    out += ',';
    out += format_double(x[0]);
    if (d.dim() == 2) {
      out += ',';
      out += format_double(x[1]);
    }
    out += ',';
    out += format_double(u.values[static_cast<Eigen::Index>(i)]);
    out += '\n';
  }
  return out;
}

GridFunction parse_function_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto where = [&] { return source + ":" + std::to_string(lineno); };

  DomainPtr domain;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    static const std::regex header(R"(#\s*domain:\s*([A-Za-z-]+)\s+(\d+)\s+(\S+)\s*)");
    std::smatch m;
    if (!std::regex_match(line, m, header))
      throw Error(ErrorKind::Config, where() + ": expected '# domain: <shape> <n> <extent>'");
    domain = build_domain(parse_shape(m[1].str()), static_cast<int>(parse_integer(m[2].str(), where())),
                          parse_double(m[3].str(), where()));
    break;
  }
  if (!domain) throw Error(ErrorKind::Config, source + ": empty function file");

  GridFunction u = GridFunction::zeros(domain);
  std::vector<unsigned char> seen(domain->size(), 0);
  const std::size_t columns = domain->dim() == 1 ? 3 : 4;
  const double tol = 1e-9 * domain->extent();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("index", 0) == 0) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      cells.push_back(rest.substr(0, pos));
    cells.push_back(rest);
    if (cells.size() != columns)
      throw Error(ErrorKind::Config, where() + ": expected " + std::to_string(columns) + " columns, got " +
                                         std::to_string(cells.size()));
    const long long g = parse_integer(cells[0], where());
    if (g < 0 || static_cast<std::size_t>(g) >= domain->node_count())
      throw Error(ErrorKind::Config, where() + ": node index " + std::to_string(g) + " out of range");
    const double value = parse_double(cells.back(), where());
    if (!std::isfinite(value)) throw Error(ErrorKind::Numeric, where() + ": non-finite value");
    const int i = domain->interior_of(static_cast<std::size_t>(g));
    if (i < 0) {
      if (value != 0.0)
        throw Error(ErrorKind::Config, where() + ": nonzero value on boundary/exterior node " + std::to_string(g));
      continue;
    }
    const auto x = domain->coordinate(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k + 2 < columns; ++k)
      if (std::abs(parse_double(cells[k + 1], where()) - x[k]) > tol)
        throw Error(ErrorKind::Config, where() + ": coordinates do not match node " + std::to_string(g));
    if (seen[static_cast<std::size_t>(i)])
      throw Error(ErrorKind::Config, where() + ": duplicate node " + std::to_string(g));
    seen[static_cast<std::size_t>(i)] = 1;
    u.values[i] = value;
  }
  return u;
}

GridFunction read_function_csv(const std::filesystem::path& path) {
  return parse_function_csv(read_file(path), path.string());
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Config, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Config, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::Config, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json function_json(const GridFunction& u) {
  json a = json::array();
  for (Eigen::Index i = 0; i < u.values.size(); ++i) a.push_back(u.values[i]);
  return a;
}

GridFunction function_from_json(const DomainPtr& domain, const json& values, const std::string& field) {
  if (!values.is_array() || values.size() != domain->size())
    throw Error(ErrorKind::Config, "report field '" + field + "': expected " + std::to_string(domain->size()) +
                                       " values");
  GridFunction u = GridFunction::zeros(domain);
  for (std::size_t i = 0; i < domain->size(); ++i) {
    if (!values[i].is_number()) throw Error(ErrorKind::Config, "report field '" + field + "': non-numeric entry");
    u.values[static_cast<Eigen::Index>(i)] = values[i].get<double>();
  }
  return u;
}

json certificate_json(const ShadowCertificate& cert) {
  json checks = json::array();
  for (const auto& c : cert.inequalities.checks) {
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"lower", number_or_null(c.lower)},
                      {"upper", number_or_null(c.upper)},
                      {"strict", c.strict},
                      {"ok", c.ok}});
  }
  json nodes = json::array();
  for (const auto& x : cert.path.nodes) nodes.push_back(function_json(x));
  return {{"c_hat", cert.c_hat},
          {"epsilon", cert.epsilon},
          {"delta", cert.delta},
          {"t_star", cert.t_star},
          {"halfspace", cert.halfspace.str()},
          {"valid", cert.inequalities.valid},
          {"inequalities", checks},
          {"u", function_json(cert.u)},
          {"v", function_json(cert.v)},
          {"w", function_json(cert.w)},
          {"path", nodes}};
}

ShadowCertificate certificate_from_json(const DomainPtr& domain, const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "certificate must be an object");
  ShadowCertificate cert;
  cert.c_hat = number_from(j, "c_hat");
  cert.epsilon = number_from(j, "epsilon");
  cert.delta = number_from(j, "delta");
  cert.t_star = number_from(j, "t_star");
  if (!j.contains("halfspace") || !j.at("halfspace").is_string())
    throw Error(ErrorKind::Config, "report field 'halfspace' missing");
  cert.halfspace = parse_halfspace(j.at("halfspace").get<std::string>());
  cert.u = function_from_json(domain, j.value("u", json()), "u");
  cert.v = function_from_json(domain, j.value("v", json()), "v");
  cert.w = function_from_json(domain, j.value("w", json()), "w");
  const json& nodes = j.value("path", json());
  if (!nodes.is_array() || nodes.size() < 2) throw Error(ErrorKind::Config, "report field 'path' missing");
  for (std::size_t k = 0; k < nodes.size(); ++k)
    cert.path.nodes.push_back(function_from_json(domain, nodes[k], "path[" + std::to_string(k) + "]"));
  return cert;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "iteration,sup,c_hat,slope\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration) + "," + format_double(r.sup) + "," + format_double(r.c_hat) + "," +
           format_double(r.slope) + "\n";
  }
  return out;
}

json error_json(const std::exception& e) {
  std::string kind = "internal";
  if (const auto* err = dynamic_cast<const Error*>(&e)) kind = std::string(to_string(err->kind()));
  return {{"error", {{"kind", kind}, {"message", e.what()}}}};
}

}  // namespace mplab::io
