#include "lobliq/discrete_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lobliq/errors.hpp"
#include "lobliq/numerics.hpp"

namespace lobliq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_power_params(double lambda, double alpha) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("power law: lambda must be > 0");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw ParameterError("power law: alpha must be > 1");
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("trading unit delta must be > 0");
}

// Solves rate * c_n = scale * (c_n - c_{n-1})^{1-alpha}, c_0 = 0, for n = 1..n_max.
// Each step is solved for the increment d_n = c_n - c_{n-1}; since increments
// are non-increasing, d_n lies in (0, d_{n-1}] and the log-residual
// log(scale) + (1-alpha) log d - log(rate (c_{n-1} + d)) changes sign there.
std::vector<double> solve_power_recursion(double scale, double rate, double alpha, std::size_t n_max) {
  std::vector<double> c(n_max + 1, 0.0);
  if (n_max == 0) return c;
  c[1] = std::pow(scale / rate, 1.0 / alpha);
  const double log_scale = std::log(scale);
  for (std::size_t n = 2; n <= n_max; ++n) {
    const double prev = c[n - 1];
    const double d_prev = c[n - 1] - c[n - 2];
    if (alpha == 2.0) {
      // c_n (c_n - c_{n-1}) = scale / rate is a quadratic.
      const double q = scale / rate;
      const double d = 2.0 * q / (prev + std::sqrt(prev * prev + 4.0 * q));
      c[n] = prev + d;
      continue;
    }
    const auto h = [&](double d) { return log_scale + (1.0 - alpha) * std::log(d) - std::log(rate * (prev + d)); };
    double lo = 0.5 * d_prev;
    int guard = 0;
    while (h(lo) <= 0.0) {
      lo *= 0.5;
      if (++guard > 2000) throw NumericalError("power recursion: could not bracket increment");
    }
    const double d = numerics::solve_monotone_root(h, {lo, d_prev, 1e-16 * d_prev});
    c[n] = prev + d;
  }
  return c;
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Running log of partial sums P_n = sum_{j<=n} z^j / j!, z = lambda T / (delta e).
std::vector<double> exp_log_partial_sums(std::size_t n_max, double delta, double remaining, double lambda) {
  std::vector<double> log_p(n_max + 1, 0.0);
  if (remaining == 0.0) return log_p;  // z = 0: P_n = 1
  const double log_z = std::log(lambda * remaining / delta) - 1.0;
  for (std::size_t j = 1; j <= n_max; ++j) {
    const double log_term = static_cast<double>(j) * log_z - std::lgamma(static_cast<double>(j) + 1.0);
    log_p[j] = log_add_exp(log_p[j - 1], log_term);
  }
  return log_p;
}

void check_exp_finite(double delta, double remaining, double lambda, double kappa) {
  check_delta(delta);
  if (!(lambda > 0.0)) throw ParameterError("exponential book: lambda must be > 0");
  if (!(kappa > 0.0)) throw ParameterError("exponential book: kappa must be > 0");
  if (!(remaining >= 0.0) || !std::isfinite(remaining)) throw ParameterError("time to maturity must be >= 0");
}

struct LevelOptimum {
  double spread;
  double value;
};

// sup_s Lambda(s)/(Lambda(s) + r delta) (s delta + v_prev) for one inventory level.
LevelOptimum maximize_level(const IntensityModel& model, double delta, double r, double v_prev, double start,
                            std::size_t level) {
  const double s_min = model.support_min();
  const auto objective = [&](double t) {
    const double s = s_min + t;
    const double lam = rate(model, s);
    const double q = std::isinf(lam) ? 1.0 : lam / (lam + r * delta);
    return q * (s * delta + v_prev);
  };
  const auto fail = [level](const char* what) {
    std::ostringstream msg;
    msg << "generic stationary solver: " << what << " at inventory level " << level;
    throw NumericalError(msg.str());
  };

  // Geometric bracket (a, b, c) in t = s - s_min with f(b) >= f(a), f(b) > f(c).
  double b = start > 0.0 && std::isfinite(start) ? start : 1.0;
  double fb = objective(b);
  double a, c, fc;
  double up = 2.0 * b;
  double fup = objective(up);
  if (fup > fb) {
    a = b;
    b = up;
    fb = fup;
    for (;;) {
      c = 2.0 * b;
      fc = objective(c);
      if (fc < fb) break;
      a = b;
      b = c;
      fb = fc;
      if (b > 1e15) fail("objective still increasing at very large spreads (no maximizer)");
    }
  } else {
    c = up;
    fc = fup;
    for (;;) {
      a = 0.5 * b;
      const double fa = objective(a);
      if (fa <= fb) break;
      c = b;
      fc = fb;
      b = a;
      fb = fa;
      if (b < 1e-300) fail("objective maximized at the support boundary");
    }
  }

  // Golden-section search in log t.
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = std::log(a);
  double hi = std::log(c);
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = objective(std::exp(x1));
  double f2 = objective(std::exp(x2));
  // Objective differences drown in roundoff once hi - lo is near sqrt(eps);
  // stop earlier and let the first-order condition finish the job.
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = objective(std::exp(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = objective(std::exp(x1));
    }
  }
  double t_best = std::exp(0.5 * (lo + hi));

  // Polish with the first-order condition; it is positive left of the maximizer.
  const auto foc = [&](double t) {
    const auto d = derivatives(model, s_min + t);
    return r * d.first * ((s_min + t) * delta + v_prev) + d.value * (d.value + r * delta);
  };
  for (double width = 1e-5; width < 1.0; width *= 8.0) {
    const double t_lo = std::max(a, t_best * (1.0 - width));
    const double t_hi = std::min(c, t_best * (1.0 + width));
    if (foc(t_lo) > 0.0 && foc(t_hi) < 0.0) {
      t_best = numerics::solve_monotone_root(foc, {t_lo, t_hi, 1e-15 * t_best});
      break;
    }
  }
  return {s_min + t_best, objective(t_best)};
}

}  // namespace

std::size_t grid_level(double x, double delta) {
  check_delta(delta);
  if (!(x >= 0.0) || !std::isfinite(x)) throw ParameterError("inventory must be finite and >= 0");
  const double ratio = x / delta;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "inventory " << x << " is not a multiple of the trading unit " << delta;
    throw ParameterError(msg.str());
  }
  return static_cast<std::size_t>(n);
}

double PowerCoefficients::lambda_effective() const { return lambda * std::pow(delta, alpha - 1.0); }

double PowerCoefficients::relative_residual(std::size_t n) const {
  if (n == 0 || n > n_max()) throw std::out_of_range("relative_residual: level out of range");
  const double rhs = power_constant(alpha) * lambda_effective() * std::pow(c[n] - c[n - 1], 1.0 - alpha);
  return std::abs(r * c[n] - rhs) / (r * c[n]);
}

PowerCoefficients solve_power_coefficients(double lambda, double alpha, double r, std::size_t n_max, double delta) {
  check_power_params(lambda, alpha);
  check_delta(delta);
  if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("power coefficients: r must be > 0");
  if (n_max < 1) throw ParameterError("power coefficients: n_max must be >= 1");
  PowerCoefficients out{lambda, alpha, r, delta, {}};
  out.c = solve_power_recursion(power_constant(alpha) * out.lambda_effective(), r, alpha, n_max);
  return out;
}

ValueSpread power_value_and_spread(std::size_t n, const Horizon& remaining, const PowerCoefficients& coeffs) {
  if (n == 0 || n > coeffs.n_max()) {
    std::ostringstream msg;
    msg << "power_value_and_spread: level " << n << " outside 1.." << coeffs.n_max();
    throw std::out_of_range(msg.str());
  }
  const double g = power_time_factor(coeffs.r, coeffs.alpha, remaining);
  if (g == 0.0) return {0.0, 0.0};
  // The delta scaling cancels in the spread: lambda_eff^{1/(alpha-1)} / delta = lambda^{1/(alpha-1)}.
  const double base = std::pow(coeffs.lambda / (coeffs.alpha * coeffs.r * coeffs.c[n]), 1.0 / (coeffs.alpha - 1.0));
  return {coeffs.c[n] * g, base * g};
}

double ZeroRateCoefficients::value(std::size_t n, double remaining) const {
  if (!(remaining >= 0.0)) throw ParameterError("time to maturity must be >= 0");
  return d.at(n) * std::pow(remaining, 1.0 / alpha);
}

double ZeroRateCoefficients::spread(std::size_t n, double remaining) const {
  if (n == 0 || n > n_max()) throw std::out_of_range("zero-rate spread: level out of range");
  return alpha / (alpha - 1.0) * (d[n] - d[n - 1]) / delta * std::pow(remaining, 1.0 / alpha);
}

double ZeroRateCoefficients::relative_residual(std::size_t n) const {
  if (n == 0 || n > n_max()) throw std::out_of_range("relative_residual: level out of range");
  const double lam = lambda * std::pow(delta, alpha - 1.0);
  const double rhs = lam * std::pow((alpha - 1.0) / alpha, alpha - 1.0) * std::pow(d[n] - d[n - 1], 1.0 - alpha);
  return std::abs(d[n] - rhs) / d[n];
}

ZeroRateCoefficients solve_power_zero_rate(double lambda, double alpha, std::size_t n_max, double delta) {
  check_power_params(lambda, alpha);
  check_delta(delta);
  if (n_max < 1) throw ParameterError("zero-rate coefficients: n_max must be >= 1");
  // Same recursion as c_n with r = 1 and scale lambda ((alpha-1)/alpha)^{alpha-1}.
  const double lam = lambda * std::pow(delta, alpha - 1.0);
  ZeroRateCoefficients out{lambda, alpha, delta, {}};
  out.d = solve_power_recursion(lam * std::pow((alpha - 1.0) / alpha, alpha - 1.0), 1.0, alpha, n_max);
  return out;
}

std::vector<double> expected_liquidation_time_discrete(const PowerCoefficients& coeffs) {
  std::vector<double> s(coeffs.n_max() + 1, 0.0);
  for (std::size_t j = 1; j <= coeffs.n_max(); ++j) {
    const double spread = power_value_and_spread(j, Horizon::infinite(), coeffs).spread;
    const double fill_rate = coeffs.lambda * std::pow(spread, -coeffs.alpha) / coeffs.delta;
    s[j] = s[j - 1] + 1.0 / fill_rate;
  }
  return s;
}

ExpFiniteTable solve_exp_finite(std::size_t n_max, double delta, std::span<const double> horizons, double lambda,
                                double kappa) {
  ExpFiniteTable out;
  out.lambda = lambda;
  out.kappa = kappa;
  out.delta = delta;
  out.horizons.assign(horizons.begin(), horizons.end());
  out.values.assign(n_max + 1, std::vector<double>(horizons.size(), 0.0));
  out.spreads.assign(n_max + 1, std::vector<double>(horizons.size(), kNaN));
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    check_exp_finite(delta, horizons[k], lambda, kappa);
    const auto log_p = exp_log_partial_sums(n_max, delta, horizons[k], lambda);
    for (std::size_t n = 1; n <= n_max; ++n) {
      out.values[n][k] = delta / kappa * log_p[n];
      out.spreads[n][k] = (1.0 + log_p[n] - log_p[n - 1]) / kappa;
    }
  }
  return out;
}

double exp_finite_value(std::size_t n, double delta, double remaining, double lambda, double kappa) {
  check_exp_finite(delta, remaining, lambda, kappa);
  return delta / kappa * exp_log_partial_sums(n, delta, remaining, lambda)[n];
}

double exp_finite_spread(std::size_t n, double delta, double remaining, double lambda, double kappa) {
  check_exp_finite(delta, remaining, lambda, kappa);
  if (n == 0) throw std::out_of_range("exp_finite_spread: no spread at zero inventory");
  const auto log_p = exp_log_partial_sums(n, delta, remaining, lambda);
  return (1.0 + log_p[n] - log_p[n - 1]) / kappa;
}

DiscreteSolution solve_exp_infinite(double x_max, double delta, double lambda, double kappa, double r) {
  if (!(r > 0.0)) throw ParameterError("exponential infinite horizon: r must be > 0");
  const std::size_t n_max = grid_level(x_max, delta);
  auto model = IntensityModel::exp_decay(lambda, kappa);
  DiscreteSolution out{model, r, delta, std::vector<double>(n_max + 1, 0.0), std::vector<double>(n_max + 1, kNaN),
                       true};
  // u_n = kappa V(n delta) / delta satisfies u_n = W(a e^{u_{n-1} - 1}), a = lambda / (r delta).
  const double log_a = std::log(lambda / (r * delta));
  const double bound = lambda / (kappa * r * std::numbers::e);
  double u_prev = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double u = numerics::lambert_w0_of_exp(log_a + u_prev - 1.0);
    out.values[n] = delta * u / kappa;
    out.spreads[n] = (1.0 + u - u_prev) / kappa;
    if (!(out.values[n] < bound * (1.0 + 1e-10))) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "exponential infinite horizon: value " << out.values[n] << " at level " << n
          << " exceeds the bound lambda/(kappa r e) = " << bound;
      throw NumericalError(msg.str());
    }
    u_prev = u;
  }
  return out;
}

DiscreteSolution solve_generic_stationary(const IntensityModel& model, double delta, double r, std::size_t n_max) {
  check_delta(delta);
  if (!(r > 0.0)) throw ParameterError("generic stationary solver: r must be > 0");
  DiscreteSolution out{model, r, delta, std::vector<double>(n_max + 1, 0.0), std::vector<double>(n_max + 1, kNaN),
                       true};
  double start = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto opt = maximize_level(model, delta, r, out.values[n - 1], start, n);
    out.values[n] = opt.value;
    out.spreads[n] = opt.spread;
    start = opt.spread - model.support_min();
  }
  if (n_max >= 1) {
    std::vector<double> interior(out.spreads.begin() + 1, out.spreads.end());
    out.shape_guaranteed = concavity_condition_holds(model, interior).holds;
  }
  return out;
}

DiscreteSolution to_discrete_solution(const PowerCoefficients& coeffs) {
  DiscreteSolution out{IntensityModel::power_law(coeffs.lambda, coeffs.alpha), coeffs.r, coeffs.delta, coeffs.c,
                       std::vector<double>(coeffs.c.size(), kNaN), true};
  for (std::size_t n = 1; n <= coeffs.n_max(); ++n) {
    out.spreads[n] = power_value_and_spread(n, Horizon::infinite(), coeffs).spread;
  }
  return out;
}

}  // namespace lobliq
