#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lobliq/intensity.hpp"

namespace lobliq {

/// Inventory level n = x / delta. Throws ParameterError when x is not on the
/// delta-grid (relative mismatch above 1e-9).
std::size_t grid_level(double x, double delta);

/// Power-law coefficients c_0 = 0 < c_1 < ... solving r c_n = A lambda_eff (c_n - c_{n-1})^{1-alpha}.
///
/// A trading unit delta changes the fill rate to Lambda/delta and the payoff
/// per fill to s*delta. The supremum over s then scales as
///   (lambda/delta) sup_s (s delta - D) s^-alpha = A lambda delta^{alpha-1} D^{1-alpha},
/// so the delta problem is the unit problem with lambda_eff = lambda delta^{alpha-1}
/// and V^delta(n delta) = c_n(lambda_eff) with no further rescaling of values.
struct PowerCoefficients {
  double lambda = 1.0;  // as supplied, before the delta scaling
  double alpha = 2.0;
  double r = 0.1;
  double delta = 1.0;
  std::vector<double> c;

  std::size_t n_max() const { return c.size() - 1; }
  double lambda_effective() const;
  /// |r c_n - A lambda_eff (c_n - c_{n-1})^{1-alpha}| / (r c_n).
  double relative_residual(std::size_t n) const;
};

PowerCoefficients solve_power_coefficients(double lambda, double alpha, double r, std::size_t n_max,
                                           double delta = 1.0);

struct ValueSpread {
  double value = 0.0;
  double spread = 0.0;
};

/// V(n delta, T) = c_n (1 - e^{-r alpha T})^{1/alpha} and the optimal spread
/// (lambda / (alpha r c_n))^{1/(alpha-1)} (1 - e^{-r alpha T})^{1/alpha}.
ValueSpread power_value_and_spread(std::size_t n, const Horizon& remaining, const PowerCoefficients& coeffs);

/// r = 0 power-law book: V(n, T) = d_n T^{1/alpha} with
/// d_n = lambda_eff ((alpha-1)/alpha)^{alpha-1} (d_n - d_{n-1})^{1-alpha}.
struct ZeroRateCoefficients {
  double lambda = 1.0;
  double alpha = 2.0;
  double delta = 1.0;
  std::vector<double> d;

  std::size_t n_max() const { return d.size() - 1; }
  double value(std::size_t n, double remaining) const;
  double spread(std::size_t n, double remaining) const;
  double relative_residual(std::size_t n) const;
};

ZeroRateCoefficients solve_power_zero_rate(double lambda, double alpha, std::size_t n_max, double delta = 1.0);

/// Expected time to liquidate S(n) = sum_{j<=n} delta / Lambda(s*(j)) under the
/// stationary optimal policy. S[0] = 0.
std::vector<double> expected_liquidation_time_discrete(const PowerCoefficients& coeffs);

/// Exponential book, r = 0, finite horizon. Row n, column k holds the value
/// (or spread) at inventory n*delta and time to maturity horizons[k].
struct ExpFiniteTable {
  double lambda = 1.0;
  double kappa = 1.0;
  double delta = 1.0;
  std::vector<double> horizons;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> spreads;  // row 0 is NaN
};

ExpFiniteTable solve_exp_finite(std::size_t n_max, double delta, std::span<const double> horizons, double lambda,
                                double kappa);

/// Single entries of the same closed form, evaluated in log space.
double exp_finite_value(std::size_t n, double delta, double remaining, double lambda, double kappa);
double exp_finite_spread(std::size_t n, double delta, double remaining, double lambda, double kappa);

/// Stationary (infinite-horizon) solution on the delta-grid.
struct DiscreteSolution {
  IntensityModel model;
  double r = 0.0;
  double delta = 1.0;
  std::vector<double> values;   // V^delta(n delta), values[0] = 0
  std::vector<double> spreads;  // s^(delta)(n delta), spreads[0] is NaN
  bool shape_guaranteed = true;  // concavity condition held at every optimal spread

  std::size_t n_max() const { return values.size() - 1; }
  double value_at(double x) const { return values.at(grid_level(x, delta)); }
  double spread_at(double x) const { return spreads.at(grid_level(x, delta)); }
};

/// V^delta(x) = (delta/kappa) W(lambda/(r delta) exp(kappa V^delta(x - delta)/delta - 1)).
DiscreteSolution solve_exp_infinite(double x_max, double delta, double lambda, double kappa, double r);

/// Dynamic programming to the first fill:
///   V(x) = sup_s Lambda(s)/(Lambda(s) + r delta) (s delta + V(x - delta)).
/// Golden-section search on a geometric bracket, then the first-order condition
/// r Lambda'(s)(s delta + V) + Lambda(s)(Lambda(s) + r delta) = 0 is solved to
/// machine precision inside the final bracket.
DiscreteSolution solve_generic_stationary(const IntensityModel& model, double delta, double r, std::size_t n_max);

/// Infinite-horizon power-law coefficients as a stationary solution.
DiscreteSolution to_discrete_solution(const PowerCoefficients& coeffs);

}  // namespace lobliq
