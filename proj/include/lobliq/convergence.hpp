#pragma once

#include <cstddef>
#include <vector>

#include "lobliq/intensity.hpp"

namespace lobliq {

/// Discrete values and spreads at one inventory against the fluid limit,
/// over the ladder delta_k = delta0 2^-k.
struct ConvergenceReport {
  IntensityModel model = IntensityModel::power_law(1.0, 2.0);
  MarketParams market;
  double x_probe = 0.0;

  std::vector<double> deltas;
  std::vector<double> values;         // V^delta(x_probe)
  std::vector<double> ratios;         // V^delta / v
  std::vector<double> spreads;        // s^(delta)(x_probe)
  std::vector<double> spread_errors;  // |s^(delta) - s^(0)|
  double fluid_value = 0.0;
  double fluid_spread = 0.0;

  bool monotone_ok = false;        // V strictly increasing down the ladder (1e-12 slack)
  bool bounded_ok = false;         // V <= v (1e-9 relative slack)
  bool spread_ordering_ok = false;  // s^(delta) >= s^(0); descriptive only
  std::vector<double> error_orders;  // log2(err_{k-1} / err_k), k >= 1
  double rate_estimate = 0.0;        // last entry of error_orders; empirical only
};

/// One rung: discrete value and spread at x for the given unit.
struct DiscretePoint {
  double value = 0.0;
  double spread = 0.0;
};

/// Dispatches to the closed-form discrete solver of the model:
/// power law (any horizon), exponential (r = 0 finite horizon, or infinite horizon).
DiscretePoint discrete_at(const IntensityModel& model, const MarketParams& market, double x, double delta);

/// Fluid value and spread at x for the same model families.
DiscretePoint fluid_at(const IntensityModel& model, const MarketParams& market, double x);

/// Rungs are independent solves run on up to `threads` workers; the report
/// does not depend on the thread count.
ConvergenceReport value_convergence(const IntensityModel& model, const MarketParams& market, double x_probe,
                                    double delta0, std::size_t k_max, unsigned threads = 1);

struct SpreadTable {
  std::vector<double> deltas;
  std::vector<double> spreads;          // s^(delta)(x)
  std::vector<double> pointwise_errors;  // |s^(delta) - s^(0)(x)|
  std::vector<double> averaged;          // (1/delta) int_{x-delta}^x s^(0)(u) du
  std::vector<double> averaged_errors;   // |s^(delta) - averaged|
  double fluid_spread = 0.0;
  bool pointwise_decreasing = false;  // pointwise errors strictly fall along the ladder
  bool averaged_closer = false;       // averaged error <= pointwise error at every rung
};

SpreadTable control_convergence(const IntensityModel& model, const MarketParams& market, double x_probe,
                                const std::vector<double>& delta_ladder);

/// Cell average of the fluid spread over [x - delta, x], by quadrature.
double averaged_fluid_spread(const IntensityModel& model, const MarketParams& market, double x, double delta);

/// c_n / ((lambda/(r alpha))^{1/alpha} n^{(alpha-1)/alpha}) and
/// s*(n) n^{1/alpha} / (lambda/(alpha r))^{1/alpha}, both tending to 1.
struct AsymptoticsTable {
  std::vector<std::size_t> n;
  std::vector<double> coefficient_ratio;
  std::vector<double> spread_ratio;
  double last_coefficient_deviation = 0.0;
  double last_spread_deviation = 0.0;
};

AsymptoticsTable coefficient_asymptotics(double lambda, double alpha, double r, std::size_t n_max);

}  // namespace lobliq
