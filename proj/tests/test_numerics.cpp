#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/lambert_w.hpp>

#include "doctest.h"
#include "lobliq/numerics.hpp"

using namespace lobliq;
using namespace lobliq::numerics;

namespace {

// Plain bisection on w e^w = y; the oracle for the Halley implementation.
double bisect_w(double y, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) < y) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Ei(x) for x < 0 by its power series; li(y) = Ei(log y).
double ei_series(double x) {
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 400; ++k) {
    term *= x / k;
    sum += term / k;
    if (std::abs(term / k) < 1e-18 * std::abs(sum)) break;
  }
  return std::numbers::egamma + std::log(std::abs(x)) + sum;
}

}  // namespace

TEST_CASE("lambert_w0 anchor values") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::numbers::e) == doctest::Approx(1.0).epsilon(1e-15));
  const double oracle = bisect_w(1.0, 0.0, 1.0);
  CHECK(std::abs(oracle - 0.5671432904097838) < 1e-12);
  CHECK(std::abs(lambert_w0(1.0) - oracle) < 1e-12);
  CHECK(lambert_w0(-1.0 / std::numbers::e) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("lambert_w0 rejects arguments below -1/e") {
  CHECK_THROWS_AS(lambert_w0(-0.5), std::domain_error);
  CHECK_THROWS_AS(lambert_w0(std::nan("")), std::domain_error);
}

TEST_CASE("lambert_w0 round trip on a log grid") {
  for (double ly = -6.0; ly <= 6.0; ly += 0.05) {
    const double y = std::pow(10.0, ly);
    const double w = lambert_w0(y);
    CHECK(std::abs(w * std::exp(w) - y) / std::max(1.0, y) <= 1e-12);
    CHECK(std::abs(w - boost::math::lambert_w0(y)) <= 1e-13 * std::max(1.0, std::abs(w)));
  }
  for (double y = -0.3678; y < 0.0; y += 0.01) {
    const double w = lambert_w0(y);
    CHECK(std::abs(w * std::exp(w) - y) <= 1e-13);
  }
}

TEST_CASE("lambert_w0_of_exp matches the direct form and extends past overflow") {
  for (double l = -20.0; l < 500.0; l += 7.3) {
    CHECK(lambert_w0_of_exp(l) == doctest::Approx(lambert_w0(std::exp(l))).epsilon(1e-14));
  }
  for (double l : {600.0, 1e3, 1e5, 1e8}) {
    const double w = lambert_w0_of_exp(l);
    CHECK(std::abs(w + std::log(w) - l) <= 1e-13 * l);
  }
}

TEST_CASE("log_integral values against the exponential-integral series") {
  CHECK(log_integral(0.0) == 0.0);
  const double li_half = log_integral(0.5);
  CHECK(li_half < 0.0);
  CHECK(std::abs(li_half - ei_series(std::log(0.5))) < 1e-10);
  CHECK(std::abs(li_half - (-0.37867104306108797)) < 1e-12);
  for (double y : {1e-8, 0.01, 0.1, 0.3, 0.6, 0.9, 0.99, 0.999999}) {
    const double expected = boost::math::expint(std::log(y));
    CHECK(std::abs(log_integral(y) - expected) <= 1e-11 * std::max(1.0, std::abs(expected)));
  }
  CHECK(log_integral(0.3) > log_integral(0.6));
}

TEST_CASE("log_integral_of_exp keeps precision next to one") {
  for (double u : {1e-12, 1e-6, 1e-3, 0.5, 3.0, 40.0}) {
    const double expected = -boost::math::expint(1, u);
    CHECK(std::abs(log_integral_of_exp(-u) - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("log_integral domain errors") {
  CHECK_THROWS_AS(log_integral(-0.1), std::domain_error);
  CHECK_THROWS_AS(log_integral(1.0), std::domain_error);
  CHECK_THROWS_AS(log_integral(2.0), std::domain_error);
}

TEST_CASE("log_integral additivity against direct quadrature") {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double grid[] = {0.01, 0.2, 0.45, 0.7, 0.9, 0.98};
  for (double a : grid) {
    for (double b : grid) {
      if (!(a < b)) continue;
      const double direct = ts.integrate([](double t) { return 1.0 / std::log(t); }, a, b);
      CHECK(std::abs((log_integral(b) - log_integral(a)) - direct) < 1e-9);
    }
  }
}

TEST_CASE("solve_monotone_root examples") {
  CHECK(solve_monotone_root([](double x) { return x - 2.0; }, {0.0, 5.0}) == doctest::Approx(2.0).epsilon(1e-14));
  const double root = solve_monotone_root([](double x) { return x * x - 2.5; }, {0.0, 5.0});
  CHECK(std::abs(root - std::sqrt(2.5)) < 1e-12);
  CHECK_THROWS_AS(solve_monotone_root([](double x) { return x * x + 1.0; }, {0.0, 5.0}), NoSignChange);
}

TEST_CASE("solve_monotone_root stays inside the bracket") {
  // Steep, badly scaled functions push secant steps outward; the result must stay in [lo, hi].
  const std::vector<std::pair<double, double>> brackets = {{0.0, 1.0}, {-3.0, 0.25}, {1e-8, 1e3}, {0.9, 1.1}};
  for (const auto& [lo, hi] : brackets) {
    for (double shift : {-0.5, 0.0, 0.1, 0.24, 0.95, 1.05}) {
      const auto f = [shift](double x) { return std::atan(1e6 * (x - shift)); };
      if ((f(lo) > 0.0) == (f(hi) > 0.0)) continue;
      const double x = solve_monotone_root(f, {lo, hi, 1e-13});
      CHECK(x >= lo);
      CHECK(x <= hi);
      CHECK(std::abs(x - shift) < 1e-9);
    }
  }
}

TEST_CASE("integrate_ode on dy/dt = -y") {
  OdeProblem p;
  p.dimension = 1;
  p.right_hand_side = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
  p.t0 = 0.0;
  p.t1 = 1.0;
  p.y0 = {1.0};
  p.step_count = 100;
  const auto traj = integrate_ode(p);
  CHECK(traj.times.size() == 101);
  CHECK(std::abs(traj.final_state()[0] - std::exp(-1.0)) < 1e-8);

  // Empirical order from successive halvings.
  std::vector<double> errors;
  for (std::size_t steps : {10u, 20u, 40u, 80u}) {
    p.step_count = steps;
    errors.push_back(std::abs(integrate_ode(p).final_state()[0] - std::exp(-1.0)));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double quotient = errors[i - 1] / errors[i];
    CHECK(quotient == doctest::Approx(16.0).epsilon(0.05));
    CHECK(std::log2(quotient) >= 3.9);
  }
}

TEST_CASE("integrate_ode keeps a zero field constant") {
  OdeProblem p;
  p.dimension = 3;
  p.right_hand_side = [](double, std::span<const double>, std::span<double> dy) {
    for (auto& v : dy) v = 0.0;
  };
  p.t0 = -1.0;
  p.t1 = 2.0;
  p.y0 = {1.0, -2.0, 3.5};
  p.step_count = 7;
  const auto traj = integrate_ode(p);
  for (const auto& state : traj.states) CHECK(state == p.y0);
}

TEST_CASE("integrate_ode reports non-finite states and bad problems") {
  OdeProblem p;
  p.dimension = 1;
  p.right_hand_side = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
  p.t0 = 0.0;
  p.t1 = 10.0;
  p.y0 = {1.0};
  p.step_count = 100;
  CHECK_THROWS_AS(integrate_ode(p), NumericalError);
  p.t1 = -1.0;
  CHECK_THROWS_AS(integrate_ode(p), ParameterError);
}

TEST_CASE("integrate handles infinite upper limits") {
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.0).epsilon(1e-12));
}
