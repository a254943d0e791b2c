#include "lobliq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lobliq::numerics {

namespace {

constexpr double kInvE = 1.0 / std::numbers::e;

double initial_guess_w0(double y) {
  if (y < -0.25) {
    // Series about the branch point -1/e.
    const double p = std::sqrt(2.0 * (std::numbers::e * y + 1.0));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0));
  }
  if (y < std::numbers::e) {
    const double l = std::log1p(y);
    return l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  const double l1 = std::log(y);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace

double lambert_w0(double y) {
  if (std::isnan(y)) throw std::domain_error("lambert_w0: NaN argument");
  if (y < -kInvE) {
    // Absorb one-ulp rounding of -1/e itself.
    if (y >= -kInvE * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) return -1.0;
    std::ostringstream msg;
    msg << "lambert_w0: argument " << y << " below -1/e";
    throw std::domain_error(msg.str());
  }
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return y;
  if (y > 1e300) return lambert_w0_of_exp(std::log(y));

  double w = initial_guess_w0(y);
  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - y;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0 || !std::isfinite(denom)) break;
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
  }
  return w;
}

double lambert_w0_of_exp(double log_y) {
  if (std::isnan(log_y)) throw std::domain_error("lambert_w0_of_exp: NaN argument");
  if (log_y < 500.0) return lambert_w0(std::exp(log_y));
  // Solve w + log w = L by Newton; g is increasing and concave for w > 0.
  double w = log_y - std::log(log_y);
  for (int iter = 0; iter < 64; ++iter) {
    const double g = w + std::log(w) - log_y;
    const double step = g / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * w) break;
  }
  return w;
}

double log_integral_of_exp(double log_y) {
  if (std::isnan(log_y) || log_y >= 0.0) {
    std::ostringstream msg;
    msg << "log_integral: argument exp(" << log_y << ") outside [0, 1)";
    throw std::domain_error(msg.str());
  }
  if (std::isinf(log_y)) return 0.0;
  const double u = -log_y;
  // li(e^{-u}) = -int_0^inf exp(-u e^w) dw. The integrand is ~1 up to
  // w* = -log u and collapses within a few units after it.
  const auto integrand = [u](double w) { return std::exp(-u * std::exp(w)); };
  const double knee = std::max(0.0, -std::log(u));
  const double tail_end = std::log(800.0 / u);
  if (tail_end <= 0.0) {
    // u > 800: the integrand underflows beyond w = 0 almost immediately.
    return -integrate(integrand, 0.0, std::log1p(40.0 / u));
  }
  double total = 0.0;
  if (knee > 0.0) total += integrate(integrand, 0.0, knee);
  total += integrate(integrand, knee, std::max(knee, tail_end));
  return -total;
}

double log_integral(double y) {
  if (std::isnan(y) || y < 0.0 || y >= 1.0) {
    std::ostringstream msg;
    msg << "log_integral: argument " << y << " outside [0, 1)";
    throw std::domain_error(msg.str());
  }
  if (y == 0.0) return 0.0;
  return log_integral_of_exp(std::log(y));
}

double solve_monotone_root(const std::function<double(double)>& f, const Bracket& bracket) {
  if (!(bracket.lo <= bracket.hi)) throw ParameterError("solve_monotone_root: lo > hi");
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw NumericalError("solve_monotone_root: NaN at bracket end");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "solve_monotone_root: no sign change on [" << a << ", " << b << "] (f = " << fa
        << ", " << fb << ")";
    throw NoSignChange(msg.str());
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = b;
  double fc = fb;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 400; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * bracket.tolerance;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double rb = fb / fc;
        p = s * (2.0 * xm * qa * (qa - rb) - (b - a) * (rb - 1.0));
        q = (qa - 1.0) * (rb - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
    if (std::isnan(fb)) throw NumericalError("solve_monotone_root: NaN inside bracket");
  }
  return b;
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  // Kronrod-minus-Gauss estimates carry roundoff near 1e-16 relative; asking
  // for less than 1e-14 only drives the bisection to max depth.
  const double tol = std::max(rel_tol, 1e-14);
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double error = 0.0;
  double value;
  if (std::isfinite(a) && std::isfinite(b)) {
    // Boost compares the error of the rule on [-1, 1] against a tolerance
    // scaled by the interval length, so short intervals never terminate.
    // Integrating on [0, 1] keeps both on the same scale.
    const double width = b - a;
    value = Rule::integrate([&](double t) { return f(a + width * t) * width; }, 0.0, 1.0, 12, tol, &error);
  } else {
    value = Rule::integrate(f, a, b, 12, tol, &error);
  }
  if (!std::isfinite(value)) throw NumericalError("integrate: non-finite quadrature result");
  return value;
}

OdeTrajectory integrate_ode(const OdeProblem& problem) {
  const std::size_t n = problem.dimension;
  if (n == 0 || problem.y0.size() != n) throw ParameterError("integrate_ode: dimension mismatch");
  if (!(problem.t0 < problem.t1)) throw ParameterError("integrate_ode: require t0 < t1");
  if (problem.step_count < 1) throw ParameterError("integrate_ode: step_count must be >= 1");
  if (!problem.right_hand_side) throw ParameterError("integrate_ode: missing right-hand side");

  const double h = (problem.t1 - problem.t0) / static_cast<double>(problem.step_count);
  OdeTrajectory out;
  out.times.reserve(problem.step_count + 1);
  out.states.reserve(problem.step_count + 1);
  out.times.push_back(problem.t0);
  out.states.push_back(problem.y0);

  std::vector<double> y = problem.y0;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const auto& rhs = problem.right_hand_side;
  for (std::size_t step = 0; step < problem.step_count; ++step) {
    const double t = problem.t0 + static_cast<double>(step) * h;
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i])) {
        std::ostringstream msg;
        msg << "integrate_ode: non-finite state component " << i << " at t = " << t + h;
        throw NumericalError(msg.str());
      }
    }
    out.times.push_back(step + 1 == problem.step_count ? problem.t1 : t + h);
    out.states.push_back(y);
  }
  return out;
}

}  // namespace lobliq::numerics
