#include "lobliq/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lobliq/discrete_solver.hpp"
#include "lobliq/errors.hpp"
#include "lobliq/fluid_limit.hpp"

namespace lobliq {

namespace {

void require_supported(const IntensityModel& model, const MarketParams& market) {
  market.validate();
  if (model.as_power_law()) {
    if (!(market.r > 0.0)) throw ParameterError("convergence: power-law books need r > 0");
    return;
  }
  if (model.as_exp_decay()) {
    if (!market.horizon.is_infinite() && market.r != 0.0)
      throw ParameterError("convergence: finite-horizon exponential books need r = 0");
    return;
  }
  throw ParameterError("convergence: no fluid limit available for a generic intensity");
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

DiscretePoint discrete_at(const IntensityModel& model, const MarketParams& market, double x, double delta) {
  require_supported(model, market);
  const std::size_t n = grid_level(x, delta);
  if (n == 0) return {0.0, 0.0};
  if (const auto* p = model.as_power_law()) {
    const auto c = solve_power_coefficients(p->lambda, p->alpha, market.r, n, delta);
    const auto vs = power_value_and_spread(n, market.horizon, c);
    return {vs.value, vs.spread};
  }
  const auto* e = model.as_exp_decay();
  if (market.horizon.is_infinite()) {
    const auto sol = solve_exp_infinite(x, delta, e->lambda, e->kappa, market.r);
    return {sol.values[n], sol.spreads[n]};
  }
  const double t = market.horizon.time();
  return {exp_finite_value(n, delta, t, e->lambda, e->kappa), exp_finite_spread(n, delta, t, e->lambda, e->kappa)};
}

DiscretePoint fluid_at(const IntensityModel& model, const MarketParams& market, double x) {
  require_supported(model, market);
  if (const auto* p = model.as_power_law()) {
    const auto f = power_fluid(x, market.horizon, p->lambda, p->alpha, market.r);
    return {f.value, f.spread};
  }
  const auto* e = model.as_exp_decay();
  if (market.horizon.is_infinite()) {
    const auto f = exp_fluid_infinite(x, e->lambda, e->kappa, market.r);
    return {f.value, f.spread};
  }
  const auto f = exp_fluid_finite(x, market.horizon.time(), e->lambda, e->kappa);
  return {f.value, f.spread};
}

ConvergenceReport value_convergence(const IntensityModel& model, const MarketParams& market, double x_probe,
                                    double delta0, std::size_t k_max, unsigned threads) {
  require_supported(model, market);
  if (!(x_probe > 0.0)) throw ParameterError("convergence: x_probe must be > 0");
  if (!(delta0 > 0.0)) throw ParameterError("convergence: delta0 must be > 0");
  ConvergenceReport out;
  out.model = model;
  out.market = market;
  out.x_probe = x_probe;
  for (std::size_t k = 0; k <= k_max; ++k) {
    out.deltas.push_back(std::ldexp(delta0, -static_cast<int>(k)));
    grid_level(x_probe, out.deltas.back());  // alignment is checked before any solve starts
  }
  const std::size_t rungs = out.deltas.size();
  out.values.assign(rungs, 0.0);
  out.spreads.assign(rungs, 0.0);
  parallel_for(rungs, threads, [&](std::size_t k) {
    const auto p = discrete_at(model, market, x_probe, out.deltas[k]);
    out.values[k] = p.value;
    out.spreads[k] = p.spread;
  });

  const auto fluid = fluid_at(model, market, x_probe);
  out.fluid_value = fluid.value;
  out.fluid_spread = fluid.spread;
  out.monotone_ok = true;
  out.bounded_ok = true;
  out.spread_ordering_ok = true;
  for (std::size_t k = 0; k < rungs; ++k) {
    out.ratios.push_back(out.values[k] / fluid.value);
    out.spread_errors.push_back(std::abs(out.spreads[k] - fluid.spread));
    if (out.values[k] > fluid.value * (1.0 + 1e-9)) out.bounded_ok = false;
    if (out.spreads[k] < fluid.spread) out.spread_ordering_ok = false;
    if (k > 0) {
      if (!(out.values[k] > out.values[k - 1] - 1e-12)) out.monotone_ok = false;
      const double prev_err = fluid.value - out.values[k - 1];
      const double err = fluid.value - out.values[k];
      out.error_orders.push_back(prev_err > 0.0 && err > 0.0 ? std::log2(prev_err / err) : 0.0);
    }
  }
  if (!out.error_orders.empty()) out.rate_estimate = out.error_orders.back();
  return out;
}

double averaged_fluid_spread(const IntensityModel& model, const MarketParams& market, double x, double delta) {
  require_supported(model, market);
  if (!(delta > 0.0) || !(x >= delta * (1.0 - 1e-12)))
    throw ParameterError("averaged spread: need 0 < delta <= x");
  const double lo = std::max(0.0, x - delta);
  // tanh-sinh tolerates the integrable blow-up of s^(0) at u = 0 when delta = x.
  boost::math::quadrature::tanh_sinh<double> quad;
  const auto s0 = [&](double u) { return fluid_at(model, market, u).spread; };
  return quad.integrate(s0, lo, x, 1e-13) / (x - lo);
}

SpreadTable control_convergence(const IntensityModel& model, const MarketParams& market, double x_probe,
                                const std::vector<double>& delta_ladder) {
  require_supported(model, market);
  if (delta_ladder.empty()) throw ParameterError("control convergence: empty ladder");
  SpreadTable out;
  out.deltas = delta_ladder;
  out.fluid_spread = fluid_at(model, market, x_probe).spread;
  out.pointwise_decreasing = true;
  out.averaged_closer = true;
  for (std::size_t k = 0; k < delta_ladder.size(); ++k) {
    const double delta = delta_ladder[k];
    const double s = discrete_at(model, market, x_probe, delta).spread;
    const double avg = averaged_fluid_spread(model, market, x_probe, delta);
    out.spreads.push_back(s);
    out.pointwise_errors.push_back(std::abs(s - out.fluid_spread));
    out.averaged.push_back(avg);
    out.averaged_errors.push_back(std::abs(s - avg));
    if (k > 0 && !(out.pointwise_errors[k] < out.pointwise_errors[k - 1])) out.pointwise_decreasing = false;
    if (out.averaged_errors[k] > out.pointwise_errors[k]) out.averaged_closer = false;
  }
  return out;
}

AsymptoticsTable coefficient_asymptotics(double lambda, double alpha, double r, std::size_t n_max) {
  const auto c = solve_power_coefficients(lambda, alpha, r, n_max);
  const double scale = std::pow(lambda / (r * alpha), 1.0 / alpha);
  AsymptoticsTable out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double nn = static_cast<double>(n);
    out.n.push_back(n);
    out.coefficient_ratio.push_back(c.c[n] / (scale * std::pow(nn, (alpha - 1.0) / alpha)));
    const double s = power_value_and_spread(n, Horizon::infinite(), c).spread;
    out.spread_ratio.push_back(s * std::pow(nn, 1.0 / alpha) / scale);
  }
  if (n_max >= 1) {
    out.last_coefficient_deviation = std::abs(out.coefficient_ratio.back() - 1.0);
    out.last_spread_deviation = std::abs(out.spread_ratio.back() - 1.0);
  }
  return out;
}

}  // namespace lobliq
