#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lobliq {

/// Invalid or unknown configuration entry. `field()` is the dotted path, e.g. "model.alpha".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ModelSection {
  std::string variant = "power";  // power | exponential
  double lambda = 1.0;
  double alpha = 2.0;
  double kappa = 1.0;

  bool operator==(const ModelSection&) const = default;
};

struct MarketSection {
  double r = 0.1;
  double horizon = 1.0;  // +infinity selects the stationary problem

  bool operator==(const MarketSection&) const = default;
};

struct DiscretizationSection {
  double delta = 1.0;
  std::size_t n_max = 10;    // solve: number of levels
  double x_max = 10.0;       // fluid / exchanges domain, infinite-horizon exponential solve
  std::size_t x_points = 100;
  double x_probe = 5.0;      // converge
  double ladder_start = 1.0;  // converge: delta_k = ladder_start 2^-k
  std::size_t ladder_levels = 10;

  bool operator==(const DiscretizationSection&) const = default;
};

struct SimulationSection {
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t units = 6;
  std::size_t time_points = 20;  // grid t_i = i T / time_points, i = 0..time_points

  bool operator==(const SimulationSection&) const = default;
};

struct RegimesSection {
  double lambda0 = 1.5;
  double lambda1 = 0.5;
  double theta0 = 1.0;
  double theta1 = 1.0;
  double r = 0.1;
  double alpha = 2.0;
  double theta_min = 1e-3;
  double theta_max = 1e3;
  std::size_t theta_points = 61;
  std::size_t n_max = 100;

  bool operator==(const RegimesSection&) const = default;
};

struct ExchangesSection {
  double lambda0 = 1.0;
  double lambda1 = 0.05;
  double delta = 1.0;
  double alpha = 2.0;
  double r = 0.1;
  double x_max = 3.0;
  double grid_step = 1e-3;
  double x_seed = -1.0;
  double eps = 0.05;  // expansion column uses lambda_bar = lambda1 / eps

  bool operator==(const ExchangesSection&) const = default;
};

struct OutputSection {
  std::string dir = "out";
  std::string format = "csv";  // csv | json | both

  bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
  std::string command = "solve";  // solve fluid converge simulate curves regimes exchanges figures
  int figure = 1;                 // figures: 1..4
  ModelSection model;
  MarketSection market;
  DiscretizationSection discretization;
  SimulationSection simulation;
  RegimesSection regimes;
  ExchangesSection exchanges;
  OutputSection output;

  bool operator==(const RunConfig&) const = default;
};

/// Parses INI text with sections [run] [model] [market] [discretization]
/// [simulation] [regimes] [exchanges] [output]. Unknown sections or keys and
/// malformed values throw ConfigError. Missing keys keep their defaults.
RunConfig parse_config(const std::string& text);

/// Reads and parses a file; an unreadable or empty file is a ConfigError.
RunConfig load_config(const std::string& path);

/// INI text that parse_config maps back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Cross-field checks: known command and format, parameters within the
/// owning module's preconditions. Throws ConfigError with the field path.
void validate_config(const RunConfig& config);

}  // namespace lobliq
