#pragma once

#include <functional>

#include "lobliq/intensity.hpp"

namespace lobliq {

/// Value and optimal spread of the continuous-selling limit at one point.
/// A spread of +infinity is the x -> 0 asymptote, reported rather than thrown.
struct FluidPoint {
  double value = 0.0;
  double spread = 0.0;
};

/// Power-law fluid limit:
///   v = (lambda/(r alpha))^{1/alpha} x^{(alpha-1)/alpha} (1 - e^{-r alpha T})^{1/alpha}
///   s = (lambda/(alpha r))^{1/alpha} x^{-1/alpha}        (1 - e^{-r alpha T})^{1/alpha}
FluidPoint power_fluid(double x, const Horizon& remaining, double lambda, double alpha, double r);

/// Remaining inventory of the deterministic optimal trajectory,
///   X(t) = x exp(-int_0^t alpha r / (1 - e^{-alpha r (T-u)}) du)
///        = x (e^{alpha r (T-t)} - 1) / (e^{alpha r T} - 1),
/// or x e^{-alpha r t} on the infinite horizon.
double power_trade_curve(double t, double x, const Horizon& horizon, double alpha, double r);

/// Same curve with the exponent integrated by adaptive quadrature.
double power_trade_curve_quadrature(double t, double x, const Horizon& horizon, double alpha, double r);

/// Exponential book, r = 0, finite horizon T.
struct ExpFluidFinite {
  double value = 0.0;
  double spread = 0.0;
  bool full_liquidation = true;  // lambda T / x >= e
  double lower_bound = 0.0;      // (x/kappa) log(lambda T / x)
  double upper_bound = 0.0;      // lambda T / (kappa e)

  /// Remaining inventory at elapsed time t in [0, T]: linear in t.
  double inventory_at(double t) const;

  double x = 0.0;
  double horizon = 0.0;
  double lambda = 0.0;
};

ExpFluidFinite exp_fluid_finite(double x, double horizon, double lambda, double kappa);

/// Exponential book, infinite horizon. v solves li(e kappa r v / lambda) = -e r x / lambda
/// and the spread is (1/kappa) log(lambda / (kappa r v)).
FluidPoint exp_fluid_infinite(double x, double lambda, double kappa, double r);

/// Expected time for the power-law fluid inventory to fall from x2 to x1:
/// (1/(alpha r)) log(x2/x1).
double fluid_passage_time(double x1, double x2, double alpha, double r);

/// General form int_{x1}^{x2} du / Lambda(s0(u)) for any model, given the
/// fluid spread as a function of inventory.
double fluid_passage_time_quadrature(double x1, double x2, const IntensityModel& model,
                                     const std::function<double(double)>& fluid_spread);

/// Stationary fluid spread s0(x) for the closed-form models (infinite horizon).
std::function<double(double)> stationary_fluid_spread(const IntensityModel& model, double r);

/// Stationary fluid value v(x) for the closed-form models (infinite horizon).
std::function<double(double)> stationary_fluid_value(const IntensityModel& model, double r);

}  // namespace lobliq
