#include "lobliq/fluid_limit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lobliq/errors.hpp"
#include "lobliq/numerics.hpp"

namespace lobliq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_power(double lambda, double alpha, double r) {
  if (!(lambda > 0.0)) throw ParameterError("power fluid: lambda must be > 0");
  if (!(alpha > 1.0)) throw ParameterError("power fluid: alpha must be > 1");
  if (!(r > 0.0)) throw ParameterError("power fluid: r must be > 0");
}

void check_trade_time(double t, const Horizon& horizon) {
  if (!(t >= 0.0)) throw std::domain_error("trade curve: t must be >= 0");
  if (!horizon.is_infinite() && !(t < horizon.time())) throw std::domain_error("trade curve: t must be < T");
}

}  // namespace

FluidPoint power_fluid(double x, const Horizon& remaining, double lambda, double alpha, double r) {
  check_power(lambda, alpha, r);
  if (!(x >= 0.0)) throw ParameterError("power fluid: x must be >= 0");
  const double g = power_time_factor(r, alpha, remaining);
  const double k = std::pow(lambda / (r * alpha), 1.0 / alpha);
  if (x == 0.0) return {0.0, g == 0.0 ? 0.0 : kInf};
  return {k * std::pow(x, (alpha - 1.0) / alpha) * g, k * std::pow(x, -1.0 / alpha) * g};
}

double power_trade_curve(double t, double x, const Horizon& horizon, double alpha, double r) {
  check_trade_time(t, horizon);
  const double k = alpha * r;
  if (horizon.is_infinite()) return x * std::exp(-k * t);
  const double horizon_t = horizon.time();
  return x * std::expm1(k * (horizon_t - t)) / std::expm1(k * horizon_t);
}

double power_trade_curve_quadrature(double t, double x, const Horizon& horizon, double alpha, double r) {
  check_trade_time(t, horizon);
  const double k = alpha * r;
  if (horizon.is_infinite()) return x * std::exp(-k * t);
  const double horizon_t = horizon.time();
  const double exponent =
      numerics::integrate([&](double u) { return -k / std::expm1(-k * (horizon_t - u)); }, 0.0, t, 1e-14);
  return x * std::exp(-exponent);
}

double ExpFluidFinite::inventory_at(double t) const {
  if (!(t >= 0.0) || t > horizon) throw std::domain_error("exp fluid curve: t outside [0, T]");
  if (full_liquidation) return x * (1.0 - t / horizon);
  return x - lambda * t / std::numbers::e;
}

ExpFluidFinite exp_fluid_finite(double x, double horizon, double lambda, double kappa) {
  if (!(x > 0.0)) throw ParameterError("exp fluid: x must be > 0");
  if (!(horizon > 0.0)) throw ParameterError("exp fluid: T must be > 0");
  if (!(lambda > 0.0) || !(kappa > 0.0)) throw ParameterError("exp fluid: lambda and kappa must be > 0");
  ExpFluidFinite out;
  out.x = x;
  out.horizon = horizon;
  out.lambda = lambda;
  const double log_ratio = std::log(lambda * horizon / x);
  out.lower_bound = x / kappa * log_ratio;
  out.upper_bound = lambda * horizon / (kappa * std::numbers::e);
  // The spread is constant along the (linear) characteristic.
  out.full_liquidation = log_ratio >= 1.0;
  if (out.full_liquidation) {
    out.spread = log_ratio / kappa;
    out.value = x * out.spread;
  } else {
    out.spread = 1.0 / kappa;
    out.value = out.upper_bound;
  }
  return out;
}

FluidPoint exp_fluid_infinite(double x, double lambda, double kappa, double r) {
  if (!(x >= 0.0)) throw ParameterError("exp fluid: x must be >= 0");
  if (!(lambda > 0.0) || !(kappa > 0.0)) throw ParameterError("exp fluid: lambda and kappa must be > 0");
  if (!(r > 0.0)) throw ParameterError("exp fluid: r must be > 0");
  if (x == 0.0) return {0.0, kInf};
  // Write e kappa r v / lambda = e^{-U}. Then li(e^{-U}) = -e r x / lambda,
  // v = lambda e^{-U} / (e kappa r) and s0 = (1 + U) / kappa. Solve in log U.
  const double target = std::numbers::e * r * x / lambda;
  double u;
  if (target > 600.0) {
    // li(e^{-U}) = gamma + log U + O(U) for tiny U.
    u = std::exp(-std::numbers::egamma - target);
  } else {
    const auto residual = [target](double log_u) { return numerics::log_integral_of_exp(-std::exp(log_u)) + target; };
    const double log_u = numerics::solve_monotone_root(residual, {-700.0, std::log(800.0), 1e-14});
    u = std::exp(log_u);
  }
  const double value = lambda * std::exp(-u) / (std::numbers::e * kappa * r);
  return {value, (1.0 + u) / kappa};
}

double fluid_passage_time(double x1, double x2, double alpha, double r) {
  if (!(x1 > 0.0)) throw std::domain_error("passage time: x1 must be > 0");
  if (!(x2 >= x1)) throw std::domain_error("passage time: require x1 <= x2");
  if (!(alpha > 1.0) || !(r > 0.0)) throw ParameterError("passage time: alpha > 1 and r > 0 required");
  return std::log(x2 / x1) / (alpha * r);
}

double fluid_passage_time_quadrature(double x1, double x2, const IntensityModel& model,
                                     const std::function<double(double)>& fluid_spread) {
  if (!(x1 > 0.0)) throw std::domain_error("passage time: x1 must be > 0");
  if (!(x2 >= x1)) throw std::domain_error("passage time: require x1 <= x2");
  return numerics::integrate([&](double u) { return 1.0 / rate(model, fluid_spread(u)); }, x1, x2, 1e-14);
}

std::function<double(double)> stationary_fluid_spread(const IntensityModel& model, double r) {
  if (const auto* p = model.as_power_law()) {
    const PowerLaw pl = *p;
    return [pl, r](double x) { return power_fluid(x, Horizon::infinite(), pl.lambda, pl.alpha, r).spread; };
  }
  if (const auto* e = model.as_exp_decay()) {
    const ExpDecay ed = *e;
    return [ed, r](double x) { return exp_fluid_infinite(x, ed.lambda, ed.kappa, r).spread; };
  }
  throw ParameterError("no closed-form fluid limit for a generic intensity");
}

std::function<double(double)> stationary_fluid_value(const IntensityModel& model, double r) {
  if (const auto* p = model.as_power_law()) {
    const PowerLaw pl = *p;
    return [pl, r](double x) { return power_fluid(x, Horizon::infinite(), pl.lambda, pl.alpha, r).value; };
  }
  if (const auto* e = model.as_exp_decay()) {
    const ExpDecay ed = *e;
    return [ed, r](double x) { return exp_fluid_infinite(x, ed.lambda, ed.kappa, r).value; };
  }
  throw ParameterError("no closed-form fluid limit for a generic intensity");
}

}  // namespace lobliq
