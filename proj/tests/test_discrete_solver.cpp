#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lobliq/discrete_solver.hpp"
#include "lobliq/errors.hpp"
#include "lobliq/numerics.hpp"

using namespace lobliq;

namespace {

// Values frozen from an independent 30-digit evaluation.
constexpr double kC1 = 1.58113883008418966599944677222;  // sqrt(2.5)
constexpr double kC2 = 2.55833636800846364400183429137;  // (c1 + sqrt(c1^2 + 10)) / 2
constexpr double kW10OverE = 1.15686839661500446861658266584;

double bisect_w(double y) {
  double lo = 0.0, hi = std::max(1.0, std::log(y) + 1.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) < y) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("power coefficients: closed-form anchors") {
  const auto c = solve_power_coefficients(1.0, 2.0, 0.1, 10);
  CHECK(c.c[0] == 0.0);
  CHECK(std::abs(c.c[1] - kC1) < 1e-14);
  CHECK(std::abs(c.c[2] - kC2) < 1e-13);
}

TEST_CASE("power coefficients: recursion residuals, monotonicity and discrete concavity") {
  for (double alpha : {1.3, 2.0, 2.5, 4.0}) {
    for (double delta : {1.0, 0.1}) {
      const auto c = solve_power_coefficients(0.7, alpha, 0.05, 500, delta);
      for (std::size_t n = 1; n <= 500; ++n) {
        CHECK(c.relative_residual(n) <= 1e-10);
        CHECK(c.c[n] > c.c[n - 1]);
        if (n >= 2) CHECK(c.c[n] - c.c[n - 1] <= c.c[n - 1] - c.c[n - 2] + 1e-15);
      }
    }
  }
}

TEST_CASE("power coefficients: parameter errors") {
  CHECK_THROWS_AS(solve_power_coefficients(1.0, 1.0, 0.1, 5), ParameterError);
  CHECK_THROWS_AS(solve_power_coefficients(1.0, 2.0, 0.0, 5), ParameterError);
  CHECK_THROWS_AS(solve_power_coefficients(1.0, 2.0, -0.1, 5), ParameterError);
}

TEST_CASE("power value and spread examples") {
  const auto c = solve_power_coefficients(1.0, 2.0, 0.1, 10);
  const auto at_zero = power_value_and_spread(3, Horizon::finite(0.0), c);
  CHECK(at_zero.value == 0.0);
  CHECK(at_zero.spread == 0.0);
  const auto inf1 = power_value_and_spread(1, Horizon::infinite(), c);
  CHECK(inf1.value == doctest::Approx(1.58113883).epsilon(1e-9));
  CHECK(inf1.spread == doctest::Approx(3.16227766).epsilon(1e-9));
  CHECK_THROWS_AS(power_value_and_spread(11, Horizon::infinite(), c), std::out_of_range);
  CHECK_THROWS_AS(power_value_and_spread(0, Horizon::infinite(), c), std::out_of_range);
}

TEST_CASE("spread equals alpha/(alpha-1) times the value increment") {
  for (double alpha : {1.5, 2.0, 3.0}) {
    const auto c = solve_power_coefficients(1.0, alpha, 0.1, 50);
    for (std::size_t n = 1; n <= 50; ++n) {
      for (double t : {0.01, 0.3, 1.0, 5.0, 40.0}) {
        const auto cur = power_value_and_spread(n, Horizon::finite(t), c);
        const double prev = n == 1 ? 0.0 : power_value_and_spread(n - 1, Horizon::finite(t), c).value;
        CHECK(std::abs(cur.spread - alpha / (alpha - 1.0) * (cur.value - prev)) < 1e-10);
      }
    }
  }
}

TEST_CASE("power-law optimal intensity times (1 - e^{-r alpha T}) does not depend on T") {
  const double lambda = 1.0, alpha = 2.0, r = 0.1;
  const auto c = solve_power_coefficients(lambda, alpha, r, 8);
  for (std::size_t n = 1; n <= 8; ++n) {
    double reference = 0.0;
    for (double t : {1e-6, 1e-3, 0.1, 1.0, 10.0}) {
      const double s = power_value_and_spread(n, Horizon::finite(t), c).spread;
      const double scaled = lambda * std::pow(s, -alpha) * (-std::expm1(-r * alpha * t));
      if (reference == 0.0) reference = scaled;
      CHECK(scaled == doctest::Approx(reference).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero-rate coefficients") {
  const auto d = solve_power_zero_rate(1.0, 2.0, 20);
  CHECK(d.d[0] == 0.0);
  CHECK(std::abs(d.d[1] - std::sqrt(0.5)) < 1e-14);
  for (std::size_t n = 1; n <= 20; ++n) CHECK(d.relative_residual(n) <= 1e-10);
  for (double alpha : {1.5, 3.0}) {
    const auto dd = solve_power_zero_rate(2.0, alpha, 100);
    for (std::size_t n = 1; n <= 100; ++n) CHECK(dd.relative_residual(n) <= 1e-10);
  }
}

TEST_CASE("zero-rate values are the r -> 0 limit") {
  const auto d = solve_power_zero_rate(1.0, 2.0, 10);
  const auto c = solve_power_coefficients(1.0, 2.0, 1e-6, 10);
  for (std::size_t n = 1; n <= 10; ++n) {
    const double small_r = power_value_and_spread(n, Horizon::finite(1.0), c).value;
    CHECK(std::abs(small_r - d.value(n, 1.0)) <= 1e-4 * d.value(n, 1.0));
  }
}

TEST_CASE("expected liquidation time") {
  const auto c = solve_power_coefficients(1.0, 2.0, 0.1, 30);
  const auto s = expected_liquidation_time_discrete(c);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(10.0).epsilon(1e-12));
  // Closed-form sum lambda^{1/(alpha-1)} sum (alpha r c_j)^{-alpha/(alpha-1)}.
  double sum = 0.0;
  for (std::size_t j = 1; j <= 30; ++j) {
    sum += std::pow(2.0 * 0.1 * c.c[j], -2.0);
    CHECK(s[j] == doctest::Approx(sum).epsilon(1e-12));
    CHECK(s[j] > s[j - 1]);
    if (j >= 2) CHECK(s[j] - s[j - 1] < s[j - 1] - s[j - 2]);
  }
}

TEST_CASE("exponential finite horizon closed form") {
  const double horizon[] = {0.0, std::numbers::e};
  const auto table = solve_exp_finite(2, 1.0, horizon, 1.0, 1.0);
  CHECK(table.values[0][1] == 0.0);
  CHECK(table.values[2][0] == 0.0);
  CHECK(std::abs(table.values[1][1] - std::log(2.0)) < 1e-14);
  CHECK(std::abs(table.values[2][1] - std::log(2.5)) < 1e-14);
  CHECK(std::abs(table.spreads[2][1] - (1.0 + std::log(2.5 / 2.0))) < 1e-14);
  CHECK(exp_finite_value(2, 1.0, std::numbers::e, 1.0, 1.0) == doctest::Approx(std::log(2.5)).epsilon(1e-15));
}

TEST_CASE("exponential finite horizon: log-space sums agree with direct sums and survive tiny units") {
  const double lambda = 1.3, kappa = 0.8, t = 2.0, delta = 0.25;
  double direct = 0.0, term = 1.0;
  const double z = lambda * t / (delta * std::numbers::e);
  for (std::size_t n = 0; n <= 30; ++n) {
    if (n > 0) term *= z / static_cast<double>(n);
    direct += term;
    CHECK(exp_finite_value(n, delta, t, lambda, kappa) == doctest::Approx(delta / kappa * std::log(direct)).epsilon(1e-13));
  }
  // 5000 levels at delta = 1e-3: partial sums overflow in linear space.
  const double v = exp_finite_value(5000, 1e-3, 1.0, 1.0, 1.0);
  CHECK(std::isfinite(v));
  CHECK(v <= 1.0 / std::numbers::e + 1e-12);
  CHECK(exp_finite_spread(5000, 1e-3, 1.0, 1.0, 1.0) >= 1.0);
}

TEST_CASE("exponential finite horizon spreads are at least 1/kappa and kappa-invariant in intensity") {
  const double horizons[] = {0.5, 1.0, 3.0};
  const auto a = solve_exp_finite(25, 0.5, horizons, 2.0, 1.0);
  const auto b = solve_exp_finite(25, 0.5, horizons, 2.0, 3.0);
  for (std::size_t n = 1; n <= 25; ++n) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a.spreads[n][k] >= 1.0);
      CHECK(b.spreads[n][k] >= 1.0 / 3.0);
      CHECK(2.0 * std::exp(-a.spreads[n][k]) == doctest::Approx(2.0 * std::exp(-3.0 * b.spreads[n][k])).epsilon(1e-12));
    }
  }
}

TEST_CASE("exponential infinite horizon Lambert-W recursion") {
  const auto sol = solve_exp_infinite(60.0, 1.0, 1.0, 1.0, 0.1);
  CHECK(sol.values[0] == 0.0);
  const double oracle = bisect_w(10.0 / std::numbers::e);
  CHECK(std::abs(oracle - kW10OverE) < 1e-12);
  CHECK(std::abs(sol.values[1] - oracle) < 1e-12);
  const double bound = 1.0 / (0.1 * std::numbers::e);
  for (std::size_t n = 1; n <= sol.n_max(); ++n) {
    CHECK(sol.values[n] > sol.values[n - 1]);
    CHECK(sol.values[n] <= bound);
    CHECK(sol.spreads[n] >= 1.0);
    if (n >= 2) {
      CHECK(sol.values[n] - sol.values[n - 1] <= sol.values[n - 1] - sol.values[n - 2] + 1e-14);
      CHECK(sol.spreads[n] <= sol.spreads[n - 1] + 1e-14);
    }
  }
  CHECK(sol.values.back() == doctest::Approx(bound).epsilon(1e-6));
}

TEST_CASE("exponential infinite horizon with tiny units does not overflow") {
  const auto sol = solve_exp_infinite(5.0, 1.0 / 512.0, 1.0, 1.0, 0.1);
  CHECK(sol.n_max() == 2560);
  CHECK(std::isfinite(sol.values.back()));
  CHECK(sol.values.back() < 1.0 / (0.1 * std::numbers::e));
}

TEST_CASE("exponential scaling: doubling kappa halves values and spreads") {
  const auto a = solve_exp_infinite(10.0, 0.5, 1.0, 1.0, 0.1);
  const auto b = solve_exp_infinite(10.0, 0.5, 1.0, 2.0, 0.1);
  for (std::size_t n = 1; n <= a.n_max(); ++n) {
    CHECK(b.values[n] == doctest::Approx(0.5 * a.values[n]).epsilon(1e-13));
    CHECK(b.spreads[n] == doctest::Approx(0.5 * a.spreads[n]).epsilon(1e-13));
  }
}

TEST_CASE("generic dynamic programming reproduces the closed forms") {
  const auto power = solve_generic_stationary(IntensityModel::power_law(1.0, 2.0), 1.0, 0.1, 60);
  const auto closed = solve_power_coefficients(1.0, 2.0, 0.1, 60);
  CHECK(power.values[0] == 0.0);
  CHECK(power.shape_guaranteed);
  for (std::size_t n = 1; n <= 60; ++n) {
    CHECK(std::abs(power.values[n] - closed.c[n]) < 1e-8);
    CHECK(std::abs(power.spreads[n] - power_value_and_spread(n, Horizon::infinite(), closed).spread) < 1e-8);
  }

  const auto expo = solve_generic_stationary(IntensityModel::exp_decay(1.0, 1.0), 1.0, 0.1, 50);
  const auto lambert = solve_exp_infinite(50.0, 1.0, 1.0, 1.0, 0.1);
  for (std::size_t n = 1; n <= 50; ++n) {
    CHECK(std::abs(expo.values[n] - lambert.values[n]) < 1e-8);
    CHECK(std::abs(expo.spreads[n] - lambert.spreads[n]) < 1e-8);
  }
}

TEST_CASE("generic dynamic programming with a fractional unit matches the scaled power recursion") {
  const auto dp = solve_generic_stationary(IntensityModel::power_law(1.5, 3.0), 0.05, 0.2, 100);
  const auto closed = solve_power_coefficients(1.5, 3.0, 0.2, 100, 0.05);
  for (std::size_t n = 1; n <= 100; ++n) {
    CHECK(std::abs(dp.values[n] - closed.c[n]) < 1e-8);
    CHECK(std::abs(dp.spreads[n] - power_value_and_spread(n, Horizon::infinite(), closed).spread) < 1e-7);
  }
}

TEST_CASE("generic book satisfying the concavity condition has concave values and falling spreads") {
  // Lambda(s) = 1 / (1 + s^2): Lambda Lambda'' / Lambda'^2 = 3/2 - 1/(2 s^2) < 2 everywhere.
  auto model = IntensityModel::generic({[](double s) { return 1.0 / (1.0 + s * s); },
                                        [](double s) { return -2.0 * s / std::pow(1.0 + s * s, 2); },
                                        [](double s) { return (6.0 * s * s - 2.0) / std::pow(1.0 + s * s, 3); }, 0.0});
  const auto sol = solve_generic_stationary(model, 0.5, 0.1, 80);
  CHECK(sol.shape_guaranteed);
  for (std::size_t n = 2; n <= 80; ++n) {
    CHECK(sol.values[n] - sol.values[n - 1] <= sol.values[n - 1] - sol.values[n - 2] + 1e-12);
    CHECK(sol.spreads[n] <= sol.spreads[n - 1] + 1e-9);
  }
}

TEST_CASE("generic solver reports a missing maximizer with the level") {
  // alpha < 1 tail: the objective grows without bound.
  auto model = IntensityModel::generic({[](double s) { return std::pow(1.0 + s, -0.5); },
                                        [](double s) { return -0.5 * std::pow(1.0 + s, -1.5); },
                                        [](double s) { return 0.75 * std::pow(1.0 + s, -2.5); }, 0.0});
  try {
    solve_generic_stationary(model, 1.0, 0.1, 3);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("level 1") != std::string::npos);
  }
}

TEST_CASE("grid alignment") {
  CHECK(grid_level(5.0, 0.01) == 500);
  CHECK(grid_level(5.0, 1.0 / 512.0) == 2560);
  CHECK_THROWS_AS(grid_level(5.0, 0.3), ParameterError);
  CHECK_THROWS_AS(grid_level(1.0, 0.0), ParameterError);
}
