#include "lobliq/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lobliq/errors.hpp"
#include "lobliq/intensity.hpp"
#include "lobliq/numerics.hpp"

namespace lobliq {

namespace {

// Largest bracket half-width search for the regime recursions, in doublings.
constexpr int kMaxExpansions = 200;

// Finds x > 0 with f(x) = 0 for f decreasing from + to -, searching in log x
// outward from `guess`.
double decreasing_root_positive(const std::function<double(double)>& f, double guess, const char* what,
                                std::size_t level) {
  const auto fail = [&] {
    std::ostringstream msg;
    msg << what << ": no bracket at level " << level;
    throw NumericalError(msg.str());
  };
  double lo = guess, hi = guess;
  int k = 0;
  while (!(f(lo) > 0.0)) {
    lo *= 0.5;
    if (++k > kMaxExpansions || lo == 0.0) fail();
  }
  k = 0;
  while (!(f(hi) < 0.0)) {
    hi *= 2.0;
    if (++k > kMaxExpansions || !std::isfinite(hi)) fail();
  }
  const double log_root = numerics::solve_monotone_root([&](double y) { return f(std::exp(y)); },
                                                        {std::log(lo), std::log(hi), 1e-15});
  return std::exp(log_root);
}

double single_regime_constant(double lambda, double r, double alpha) {
  return std::pow(lambda / (r * alpha), 1.0 / alpha);
}

}  // namespace

void RegimeParams::validate() const {
  if (!(lambda1 > 0.0) || !(lambda0 > lambda1) || !std::isfinite(lambda0))
    throw ParameterError("regimes: require lambda0 > lambda1 > 0");
  if (!(theta0 >= 0.0) || !(theta1 >= 0.0)) throw ParameterError("regimes: switching rates must be >= 0");
  if (!(alpha > 1.0)) throw ParameterError("regimes: alpha must be > 1");
  if (!(r > 0.0)) throw ParameterError("regimes: r must be > 0");
}

RegimeFixedPoint regime_fluid_fixed_point(const RegimeParams& prm) {
  prm.validate();
  const double a = prm.alpha, r = prm.r;
  RegimeFixedPoint out;
  out.lower = single_regime_constant(prm.lambda1, r, a);
  out.upper = single_regime_constant(prm.lambda0, r, a);

  const auto f0 = [&](double c0, double c1) {
    return prm.lambda0 / a * std::pow(c0, 1.0 - a) - (r + prm.theta0) * c0 + prm.theta0 * c1;
  };
  const auto f1 = [&](double c0, double c1) {
    return prm.lambda1 / a * std::pow(c1, 1.0 - a) - (r + prm.theta1) * c1 + prm.theta1 * c0;
  };

  const bool inf0 = std::isinf(prm.theta0), inf1 = std::isinf(prm.theta1);
  if (inf0 || inf1) {
    // Instant switching out of a state: the chain lives in the other state, or
    // with both rates infinite the depth averages to (lambda0 + lambda1) / 2.
    double lambda_eff = prm.lambda1;
    if (inf0 && inf1) lambda_eff = 0.5 * (prm.lambda0 + prm.lambda1);
    else if (inf1) lambda_eff = prm.lambda0;
    out.c0 = out.c1 = single_regime_constant(lambda_eff, r, a);
    return out;
  }
  if (prm.theta0 == 0.0 && prm.theta1 == 0.0) {
    out.c0 = out.upper;
    out.c1 = out.lower;
  } else {
    // c0(c1) on [c1, upper]: f0 >= 0 at c0 = c1 and <= 0 at c0 = upper.
    const auto c0_of = [&](double c1) {
      if (prm.theta0 == 0.0 || !(f0(out.upper, c1) < 0.0)) return out.upper;
      if (!(f0(c1, c1) > 0.0)) return c1;
      return numerics::solve_monotone_root([&](double c0) { return f0(c0, c1); }, {c1, out.upper, 1e-16 * out.upper});
    };
    const auto psi = [&](double c1) { return f1(c0_of(c1), c1); };
    try {
      out.c1 = numerics::solve_monotone_root(psi, {out.lower, out.upper, 1e-16 * out.upper});
    } catch (const numerics::NoSignChange&) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "regimes: no fixed point bracketed by [" << out.lower << ", " << out.upper << "]";
      throw NumericalError(msg.str());
    }
    out.c0 = c0_of(out.c1);
  }
  out.residual0 = f0(out.c0, out.c1);
  out.residual1 = f1(out.c0, out.c1);
  if (prm.theta1 > 0.0) {
    out.divided_residual0 = out.c0 - ((r + prm.theta1) / prm.theta1 * out.c1 -
                                      prm.lambda1 / (a * prm.theta1) * std::pow(out.c1, 1.0 - a));
  }
  if (prm.theta0 > 0.0) {
    out.divided_residual1 = out.c1 - ((r + prm.theta0) / prm.theta0 * out.c0 -
                                      prm.lambda0 / (a * prm.theta0) * std::pow(out.c0, 1.0 - a));
  }
  return out;
}

std::vector<RegimeThetaRow> regime_theta_sweep(RegimeParams params, const std::vector<double>& thetas) {
  std::vector<RegimeThetaRow> rows;
  for (double theta : thetas) {
    params.theta0 = params.theta1 = theta;
    const auto fp = regime_fluid_fixed_point(params);
    rows.push_back({theta, fp.c0, fp.c1});
  }
  return rows;
}

RegimeDiscrete regime_discrete(const RegimeParams& prm, std::size_t n_max) {
  prm.validate();
  if (!std::isfinite(prm.theta0) || !std::isfinite(prm.theta1))
    throw ParameterError("regimes: the discrete system needs finite switching rates");
  const double a = prm.alpha, r = prm.r, big_a = power_constant(a);
  RegimeDiscrete out;
  out.u.assign(n_max + 1, 0.0);
  out.w.assign(n_max + 1, 0.0);
  double guess_u = single_regime_constant(prm.lambda0, r, a);
  double guess_w = single_regime_constant(prm.lambda1, r, a);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double u_prev = out.u[n - 1], w_prev = out.w[n - 1];
    const auto g0 = [&](double du, double w) {
      const double u = u_prev + du;
      return big_a * prm.lambda0 * std::pow(du, 1.0 - a) - r * u + prm.theta0 * (w - u);
    };
    const auto g1 = [&](double u, double dw) {
      const double w = w_prev + dw;
      return big_a * prm.lambda1 * std::pow(dw, 1.0 - a) - r * w + prm.theta1 * (u - w);
    };
    double du_last = guess_u;
    const auto du_of = [&](double w) {
      du_last = decreasing_root_positive([&](double du) { return g0(du, w); }, du_last, "regime discrete (U)", n);
      return du_last;
    };
    const double dw = decreasing_root_positive([&](double d) { return g1(u_prev + du_of(w_prev + d), d); }, guess_w,
                                               "regime discrete (W)", n);
    const double du = du_of(w_prev + dw);
    out.u[n] = u_prev + du;
    out.w[n] = w_prev + dw;
    out.max_residual = std::max({out.max_residual, std::abs(g0(du, out.w[n])) / (r * out.u[n]),
                                 std::abs(g1(out.u[n], dw)) / (r * out.w[n])});
    guess_u = du;
    guess_w = dw;
  }
  return out;
}

void TwoExchangeParams::validate() const {
  if (!(lambda0 > 0.0)) throw ParameterError("two exchanges: lambda0 must be > 0");
  if (!(lambda1 >= 0.0)) throw ParameterError("two exchanges: lambda1 must be >= 0");
  if (!(alpha > 1.0)) throw ParameterError("two exchanges: alpha must be > 1");
  if (!(r > 0.0)) throw ParameterError("two exchanges: r must be > 0");
  if (!(delta_block > 0.0)) throw ParameterError("two exchanges: delta must be > 0");
  if (!(grid_step > 0.0) || !(x_max > grid_step)) throw ParameterError("two exchanges: need 0 < grid_step < x_max");
  const double ratio = delta_block / grid_step;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw ParameterError("two exchanges: grid_step must divide delta");
  const double span = x_max / grid_step;
  if (std::abs(span - std::round(span)) > 1e-9 * span)
    throw ParameterError("two exchanges: grid_step must divide x_max");
  if (x_seed > std::min(delta_block, x_max)) throw ParameterError("two exchanges: x_seed must be <= min(delta, x_max)");
}

double two_exchange_first_order(const TwoExchangeParams& prm, double x) {
  prm.validate();
  if (!(x >= 0.0)) throw std::domain_error("two exchanges: x must be >= 0");
  const double a = prm.alpha, r = prm.r, p = (a - 1.0) / a, d = prm.delta_block;
  const double k = single_regime_constant(prm.lambda0, r, a);
  // First-order equation: -alpha r x v1' - r v1 + S(x) = 0 with
  // S(x) = A lambda_bar min(x, d)^alpha k^{1-alpha} (x^p - (x-d)+^p)^{1-alpha}.
  const double s0 = power_constant(a) * prm.lambda1 * std::pow(k, 1.0 - a);
  if (x <= d) return s0 * std::pow(x, 2.0 - 1.0 / a) / (2.0 * a * r);
  const auto integrand = [&](double y) {
    const double gap = std::pow(y, p) - std::pow(std::max(0.0, y - d), p);
    return std::pow(y, 1.0 / a - 1.0) * s0 * std::pow(d, a) * std::pow(gap, 1.0 - a) / (a * r);
  };
  // tanh-sinh copes with the infinite slope of (y - d)^p at y = d.
  boost::math::quadrature::tanh_sinh<double> quad;
  const double tail = quad.integrate(integrand, d, x, 1e-13);
  return std::pow(x, -1.0 / a) * (s0 * d * d / (2.0 * a * r) + tail);
}

std::vector<double> two_exchange_expansion(const TwoExchangeParams& prm, double eps, const std::vector<double>& xs) {
  prm.validate();
  const double a = prm.alpha;
  const double k = single_regime_constant(prm.lambda0, prm.r, a);
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    const double v0 = k * std::pow(x, (a - 1.0) / a);
    out.push_back(eps == 0.0 ? v0 : v0 + eps * two_exchange_first_order(prm, x));
  }
  return out;
}

TwoExchangeSolution two_exchange_patch(const TwoExchangeParams& prm, bool check_seed) {
  prm.validate();
  const double a = prm.alpha, r = prm.r, p = (a - 1.0) / a, h = prm.grid_step, d = prm.delta_block;
  const double big_a = power_constant(a);
  const double k = single_regime_constant(prm.lambda0, r, a);
  const std::size_t n_grid = static_cast<std::size_t>(std::llround(prm.x_max / h));
  const double x_seed_req = prm.x_seed > 0.0 ? prm.x_seed : std::min(d, prm.x_max) / 100.0;
  const std::size_t i_seed = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(x_seed_req / h)));
  const double x_seed = static_cast<double>(i_seed) * h;
  if (i_seed >= n_grid) throw ParameterError("two exchanges: seed region covers the whole domain");

  // Seed: v0 plus the first-order correction, valid for x <= delta.
  const double s0 = big_a * prm.lambda1 * std::pow(k, 1.0 - a);
  const auto seed_v = [&](double x) { return k * std::pow(x, p) + s0 * std::pow(x, 2.0 - 1.0 / a) / (2.0 * a * r); };
  const auto seed_dv = [&](double x) {
    return k * p * std::pow(x, p - 1.0) + s0 * (2.0 - 1.0 / a) * std::pow(x, 1.0 - 1.0 / a) / (2.0 * a * r);
  };

  std::vector<double> xs(n_grid + 1), w(n_grid + 1, 0.0), dw(n_grid + 1, 0.0);
  for (std::size_t i = 0; i <= n_grid; ++i) xs[i] = static_cast<double>(i) * h;
  dw[0] = std::pow(k, 1.0 / p);
  for (std::size_t i = 1; i <= i_seed; ++i) {
    const double v = seed_v(xs[i]);
    w[i] = std::pow(v, 1.0 / p);
    dw[i] = std::pow(v, 1.0 / p - 1.0) * seed_dv(xs[i]) / p;
  }

  std::size_t done = i_seed;  // last index with a stored solution
  const auto v_history = [&](double y) {
    if (y <= 0.0) return 0.0;
    if (y <= x_seed) return seed_v(y);
    std::size_t j = static_cast<std::size_t>(std::floor(y / h));
    double t = y / h - static_cast<double>(j);
    if (j >= done) {
      j = done - 1;
      t = 1.0;
    }
    const double t2 = t * t, t3 = t2 * t;
    const double wy = (2.0 * t3 - 3.0 * t2 + 1.0) * w[j] + (t3 - 2.0 * t2 + t) * h * dw[j] +
                      (-2.0 * t3 + 3.0 * t2) * w[j + 1] + (t3 - t2) * h * dw[j + 1];
    return std::pow(wy, p);
  };
  const auto rhs = [&](double x, double wx) {
    const double v = std::pow(wx, p);
    const double m = std::min(x, d);
    double bracket = r;
    if (prm.lambda1 > 0.0) {
      const double gap = v - v_history(x - d);
      if (!(gap > 0.0)) throw NumericalError("two exchanges: non-positive delayed increment");
      bracket -= big_a * prm.lambda1 * std::pow(m, a) * std::pow(gap, 1.0 - a) / v;
    }
    if (!(bracket > 0.0)) {
      std::ostringstream msg;
      msg << "two exchanges: ODE blow-up at x = " << x;
      throw NumericalError(msg.str());
    }
    return std::pow(bracket / (big_a * prm.lambda0), -1.0 / (a - 1.0)) / p;
  };

  for (std::size_t i = i_seed; i < n_grid; ++i) {
    const double x = xs[i];
    const double k1 = dw[i];
    const double k2 = rhs(x + 0.5 * h, w[i] + 0.5 * h * k1);
    const double k3 = rhs(x + 0.5 * h, w[i] + 0.5 * h * k2);
    const double k4 = rhs(x + h, w[i] + h * k3);
    w[i + 1] = w[i] + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(w[i + 1])) throw NumericalError("two exchanges: non-finite state");
    done = i + 1;
    dw[i + 1] = rhs(xs[i + 1], w[i + 1]);
  }
  if (i_seed >= 1) dw[i_seed] = rhs(xs[i_seed], w[i_seed]);

  TwoExchangeSolution out;
  out.x = xs;
  out.x_seed = x_seed;
  out.v.resize(n_grid + 1);
  out.v0.resize(n_grid + 1);
  out.spread0.assign(n_grid + 1, std::numeric_limits<double>::infinity());
  out.spread1.assign(n_grid + 1, std::numeric_limits<double>::quiet_NaN());
  const std::size_t lag = static_cast<std::size_t>(std::llround(d / h));
  for (std::size_t i = 0; i <= n_grid; ++i) {
    out.v[i] = std::pow(w[i], p);
    out.v0[i] = k * std::pow(xs[i], p);
  }
  for (std::size_t i = 1; i <= n_grid; ++i) {
    // v' = p w^{p-1} w'.
    const double dv = p * std::pow(w[i], p - 1.0) * dw[i];
    out.spread0[i] = a / (a - 1.0) * dv;
    const double below = i >= lag ? out.v[i - lag] : 0.0;
    out.spread1[i] = a / (a - 1.0) * (out.v[i] - below) / std::min(xs[i], d);
  }

  // Residual with a five-point derivative, away from knots and the seed.
  for (std::size_t i = i_seed + 3; i + 2 <= n_grid; ++i) {
    const double knot_gap = std::remainder(xs[i], d);
    if (std::abs(knot_gap) < 2.5 * h) continue;
    const double dv = (-out.v[i + 2] + 8.0 * out.v[i + 1] - 8.0 * out.v[i - 1] + out.v[i - 2]) / (12.0 * h);
    const double below = i >= lag ? out.v[i - lag] : 0.0;
    double res = big_a * prm.lambda0 * std::pow(dv, 1.0 - a) - r * out.v[i];
    if (prm.lambda1 > 0.0)
      res += big_a * prm.lambda1 * std::pow(std::min(xs[i], d), a) * std::pow(out.v[i] - below, 1.0 - a);
    out.max_residual = std::max(out.max_residual, std::abs(res));
  }

  if (check_seed) {
    TwoExchangeParams half = prm;
    half.x_seed = 0.5 * x_seed;
    if (half.x_seed >= h) {
      const auto finer = two_exchange_patch(half, false);
      out.seed_sensitivity = std::abs(finer.v.back() - out.v.back());
    }
  }
  return out;
}

}  // namespace lobliq
