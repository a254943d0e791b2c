#include "lobliq/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace lobliq {

namespace {

// Distinct wrapper: std::uint64_t may alias std::size_t.
struct U64 {
  std::uint64_t* p;
};

using Slot = std::variant<double*, std::size_t*, U64, unsigned*, int*, std::string*>;

struct Field {
  const char* section;
  const char* key;
  Slot slot;
};

std::vector<Field> fields_of(RunConfig& c) {
  auto& m = c.model;
  auto& k = c.market;
  auto& d = c.discretization;
  auto& s = c.simulation;
  auto& g = c.regimes;
  auto& e = c.exchanges;
  auto& o = c.output;
  return {
      {"run", "command", &c.command},
      {"run", "figure", &c.figure},
      {"model", "variant", &m.variant},
      {"model", "lambda", &m.lambda},
      {"model", "alpha", &m.alpha},
      {"model", "kappa", &m.kappa},
      {"market", "r", &k.r},
      {"market", "horizon", &k.horizon},
      {"discretization", "delta", &d.delta},
      {"discretization", "n_max", &d.n_max},
      {"discretization", "x_max", &d.x_max},
      {"discretization", "x_points", &d.x_points},
      {"discretization", "x_probe", &d.x_probe},
      {"discretization", "ladder_start", &d.ladder_start},
      {"discretization", "ladder_levels", &d.ladder_levels},
      {"simulation", "paths", &s.paths},
      {"simulation", "seed", U64{&s.seed}},
      {"simulation", "threads", &s.threads},
      {"simulation", "units", &s.units},
      {"simulation", "time_points", &s.time_points},
      {"regimes", "lambda0", &g.lambda0},
      {"regimes", "lambda1", &g.lambda1},
      {"regimes", "theta0", &g.theta0},
      {"regimes", "theta1", &g.theta1},
      {"regimes", "r", &g.r},
      {"regimes", "alpha", &g.alpha},
      {"regimes", "theta_min", &g.theta_min},
      {"regimes", "theta_max", &g.theta_max},
      {"regimes", "theta_points", &g.theta_points},
      {"regimes", "n_max", &g.n_max},
      {"exchanges", "lambda0", &e.lambda0},
      {"exchanges", "lambda1", &e.lambda1},
      {"exchanges", "delta", &e.delta},
      {"exchanges", "alpha", &e.alpha},
      {"exchanges", "r", &e.r},
      {"exchanges", "x_max", &e.x_max},
      {"exchanges", "grid_step", &e.grid_step},
      {"exchanges", "x_seed", &e.x_seed},
      {"exchanges", "eps", &e.eps},
      {"output", "dir", &o.dir},
      {"output", "format", &o.format},
  };
}

template <class T>
T parse_integer(const std::string& text, const std::string& path) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(path, "expected a non-negative integer, got '" + text + "'");
  return value;
}

double parse_double(const std::string& text, const std::string& path) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || std::isnan(value))
    throw ConfigError(path, "expected a number, got '" + text + "'");
  return value;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Assign {
  const std::string& text;
  const std::string& path;
  void operator()(double* p) const { *p = parse_double(text, path); }
  void operator()(std::size_t* p) const { *p = parse_integer<std::size_t>(text, path); }
  void operator()(U64 u) const { *u.p = parse_integer<std::uint64_t>(text, path); }
  void operator()(unsigned* p) const { *p = parse_integer<unsigned>(text, path); }
  void operator()(int* p) const { *p = parse_integer<int>(text, path); }
  void operator()(std::string* p) const { *p = text; }
};

struct Render {
  std::string operator()(double* p) const { return format_double(*p); }
  std::string operator()(std::size_t* p) const { return std::to_string(*p); }
  std::string operator()(U64 u) const { return std::to_string(*u.p); }
  std::string operator()(unsigned* p) const { return std::to_string(*p); }
  std::string operator()(int* p) const { return std::to_string(*p); }
  std::string operator()(std::string* p) const { return *p; }
};

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::string body;
  {
    // Full-line and trailing comments start with ';' or '#'; a trailing one
    // must follow whitespace.
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first != std::string::npos && (line[first] == '#' || line[first] == ';')) {
        body += '\n';
        continue;
      }
      for (std::size_t i = 1; i < line.size(); ++i) {
        if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
          line.erase(i);
          break;
        }
      }
      body += line + '\n';
    }
  }
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError("", "empty configuration");

  boost::property_tree::ptree tree;
  try {
    std::istringstream in(body);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& err) {
    throw ConfigError("", std::string("malformed configuration: ") + err.message() + " at line " +
                              std::to_string(err.line()));
  }

  RunConfig config;
  const auto fields = fields_of(config);
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) throw ConfigError(section, "key outside a section");
    bool known_section = false;
    for (const auto& f : fields) known_section |= section == f.section;
    if (!known_section) throw ConfigError(section, "unknown section");
    for (const auto& [key, node] : entries) {
      const std::string path = section + "." + key;
      const Field* match = nullptr;
      for (const auto& f : fields)
        if (section == f.section && key == f.key) match = &f;
      if (!match) throw ConfigError(path, "unknown key");
      if (!node.empty()) throw ConfigError(path, "nested values are not supported");
      std::visit(Assign{node.data(), path}, match->slot);
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const RunConfig& config) {
  RunConfig copy = config;
  std::ostringstream out;
  std::string current;
  for (const auto& f : fields_of(copy)) {
    if (current != f.section) {
      if (!current.empty()) out << '\n';
      current = f.section;
      out << '[' << current << "]\n";
    }
    out << f.key << " = " << std::visit(Render{}, f.slot) << '\n';
  }
  return out.str();
}

void validate_config(const RunConfig& c) {
  static const std::set<std::string> commands{"solve",  "fluid",   "converge",  "simulate",
                                              "curves", "regimes", "exchanges", "figures"};
  require(commands.count(c.command) == 1, "run.command",
          "must be one of solve, fluid, converge, simulate, curves, regimes, exchanges, figures");
  if (c.command == "figures") require(c.figure >= 1 && c.figure <= 4, "run.figure", "must be 1, 2, 3 or 4");

  const auto& m = c.model;
  require(m.variant == "power" || m.variant == "exponential", "model.variant", "must be power or exponential");
  require(std::isfinite(m.lambda) && m.lambda > 0.0, "model.lambda", "must be finite and > 0");
  if (m.variant == "power") require(std::isfinite(m.alpha) && m.alpha > 1.0, "model.alpha", "must be > 1");
  else require(std::isfinite(m.kappa) && m.kappa > 0.0, "model.kappa", "must be finite and > 0");

  require(std::isfinite(c.market.r) && c.market.r >= 0.0, "market.r", "must be finite and >= 0");
  require(c.market.horizon > 0.0, "market.horizon", "must be > 0 (inf for the stationary problem)");
  require(std::isfinite(c.market.horizon) || c.market.r > 0.0, "market.r", "must be > 0 on the infinite horizon");

  const auto& d = c.discretization;
  require(std::isfinite(d.delta) && d.delta > 0.0, "discretization.delta", "must be finite and > 0");
  require(d.n_max >= 1, "discretization.n_max", "must be >= 1");
  require(std::isfinite(d.x_max) && d.x_max > 0.0, "discretization.x_max", "must be finite and > 0");
  require(d.x_points >= 2, "discretization.x_points", "must be >= 2");
  require(std::isfinite(d.x_probe) && d.x_probe > 0.0, "discretization.x_probe", "must be finite and > 0");
  require(std::isfinite(d.ladder_start) && d.ladder_start > 0.0, "discretization.ladder_start", "must be > 0");
  require(d.ladder_levels >= 1 && d.ladder_levels <= 30, "discretization.ladder_levels", "must be in 1..30");

  const auto& s = c.simulation;
  require(s.paths >= 1, "simulation.paths", "must be >= 1");
  require(s.threads >= 1, "simulation.threads", "must be >= 1");
  require(s.units >= 1, "simulation.units", "must be >= 1");
  require(s.time_points >= 1, "simulation.time_points", "must be >= 1");

  const auto& g = c.regimes;
  require(g.lambda1 > 0.0 && g.lambda0 > g.lambda1 && std::isfinite(g.lambda0), "regimes.lambda0",
          "must satisfy lambda0 > lambda1 > 0");
  require(g.theta0 >= 0.0, "regimes.theta0", "must be >= 0");
  require(g.theta1 >= 0.0, "regimes.theta1", "must be >= 0");
  require(std::isfinite(g.r) && g.r > 0.0, "regimes.r", "must be finite and > 0");
  require(std::isfinite(g.alpha) && g.alpha > 1.0, "regimes.alpha", "must be > 1");
  require(g.theta_min > 0.0 && g.theta_max > g.theta_min && std::isfinite(g.theta_max), "regimes.theta_min",
          "need 0 < theta_min < theta_max < inf");
  require(g.theta_points >= 2, "regimes.theta_points", "must be >= 2");

  const auto& e = c.exchanges;
  require(e.lambda0 > 0.0, "exchanges.lambda0", "must be > 0");
  require(e.lambda1 >= 0.0, "exchanges.lambda1", "must be >= 0");
  require(e.delta > 0.0, "exchanges.delta", "must be > 0");
  require(e.alpha > 1.0, "exchanges.alpha", "must be > 1");
  require(e.r > 0.0, "exchanges.r", "must be > 0");
  require(e.grid_step > 0.0 && e.x_max > e.grid_step, "exchanges.grid_step", "need 0 < grid_step < x_max");
  const double ratio = e.delta / e.grid_step;
  require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, "exchanges.grid_step", "must divide delta");
  const double span = e.x_max / e.grid_step;
  require(std::abs(span - std::round(span)) <= 1e-9 * span, "exchanges.grid_step", "must divide x_max");
  require(e.x_seed <= std::min(e.delta, e.x_max), "exchanges.x_seed", "must be <= min(delta, x_max)");
  require(e.eps > 0.0 && std::isfinite(e.eps), "exchanges.eps", "must be finite and > 0");

  const auto& o = c.output;
  require(!o.dir.empty(), "output.dir", "must not be empty");
  require(o.format == "csv" || o.format == "json" || o.format == "both", "output.format", "must be csv, json or both");
}

}  // namespace lobliq
