#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "lobliq/discrete_solver.hpp"
#include "lobliq/errors.hpp"
#include "lobliq/extensions.hpp"

using namespace lobliq;

namespace {

RegimeParams figure4(double theta) {
  RegimeParams p;
  p.theta0 = p.theta1 = theta;
  return p;
}

double v0_of(const TwoExchangeParams& p, double x) {
  return std::pow(p.lambda0 / (p.alpha * p.r), 1.0 / p.alpha) * std::pow(x, (p.alpha - 1.0) / p.alpha);
}

double max_expansion_error(TwoExchangeParams p, double eps) {
  const double lambda_bar = p.lambda1;
  p.lambda1 = lambda_bar * eps;
  const auto sol = two_exchange_patch(p, false);
  TwoExchangeParams q = p;
  q.lambda1 = lambda_bar;
  double worst = 0.0;
  for (std::size_t i = 50; i < sol.x.size(); i += 50) {
    const double approx = two_exchange_expansion(q, eps, {sol.x[i]})[0];
    worst = std::max(worst, std::abs(sol.v[i] - approx));
  }
  return worst;
}

}  // namespace

TEST_CASE("regimes: slow-switching limits") {
  const auto fp = regime_fluid_fixed_point(figure4(1e-8));
  CHECK(std::abs(fp.c0 - std::sqrt(7.5)) < 1e-6);
  CHECK(std::abs(fp.c1 - std::sqrt(2.5)) < 1e-6);
  const auto zero = regime_fluid_fixed_point(figure4(0.0));
  CHECK(zero.c0 == doctest::Approx(std::sqrt(7.5)).epsilon(1e-15));
  CHECK(zero.c1 == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
}

TEST_CASE("regimes: fast-switching limit") {
  const auto fp = regime_fluid_fixed_point(figure4(1e8));
  CHECK(std::abs(fp.c0 - std::sqrt(5.0)) < 1e-6);
  CHECK(std::abs(fp.c1 - std::sqrt(5.0)) < 1e-6);
  const auto inf = regime_fluid_fixed_point(figure4(std::numeric_limits<double>::infinity()));
  CHECK(inf.c0 == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(inf.c1 == inf.c0);
}

TEST_CASE("regimes: one-sided infinite rates pin the chain to a state") {
  auto p = figure4(1.0);
  p.theta0 = std::numeric_limits<double>::infinity();
  CHECK(regime_fluid_fixed_point(p).c0 == doctest::Approx(std::sqrt(2.5)));
  p.theta0 = 1.0;
  p.theta1 = std::numeric_limits<double>::infinity();
  CHECK(regime_fluid_fixed_point(p).c1 == doctest::Approx(std::sqrt(7.5)));
}

TEST_CASE("regimes: ordering and residuals at unit switching rates") {
  const auto fp = regime_fluid_fixed_point(figure4(1.0));
  CHECK(fp.lower < fp.c1);
  CHECK(fp.c1 < fp.c0);
  CHECK(fp.c0 < fp.upper);
  CHECK(std::abs(fp.residual0) <= 1e-12);
  CHECK(std::abs(fp.residual1) <= 1e-12);
  CHECK(std::abs(fp.divided_residual0) <= 1e-12);
  CHECK(std::abs(fp.divided_residual1) <= 1e-12);
}

TEST_CASE("regimes: asymmetric rates and other exponents satisfy the system") {
  for (double alpha : {1.5, 2.0, 3.0}) {
    for (double t0 : {0.01, 0.3, 5.0, 200.0}) {
      for (double t1 : {0.02, 1.0, 40.0}) {
        RegimeParams p;
        p.alpha = alpha;
        p.theta0 = t0;
        p.theta1 = t1;
        const auto fp = regime_fluid_fixed_point(p);
        CHECK(std::abs(fp.residual0) <= 1e-12 * std::max(1.0, t0 * fp.c0));
        CHECK(std::abs(fp.residual1) <= 1e-12 * std::max(1.0, t1 * fp.c1));
        CHECK(fp.lower < fp.c1);
        CHECK(fp.c1 < fp.c0);
        CHECK(fp.c0 < fp.upper);
      }
    }
  }
}

TEST_CASE("regimes: monotone in a symmetric switching rate") {
  std::vector<double> thetas;
  for (int k = -6; k <= 6; ++k) thetas.push_back(std::pow(10.0, 0.5 * k));
  const auto rows = regime_theta_sweep(figure4(1.0), thetas);
  REQUIRE(rows.size() == thetas.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].c0 < rows[i - 1].c0);
    CHECK(rows[i].c1 > rows[i - 1].c1);
  }
  CHECK(rows.back().c0 - rows.back().c1 < 1e-2);
}

TEST_CASE("regimes: parameter validation") {
  RegimeParams p;
  p.lambda1 = 2.0;
  CHECK_THROWS_AS(regime_fluid_fixed_point(p), ParameterError);
  p = RegimeParams{};
  p.theta0 = -1.0;
  CHECK_THROWS_AS(regime_fluid_fixed_point(p), ParameterError);
  p = RegimeParams{};
  p.r = 0.0;
  CHECK_THROWS_AS(regime_fluid_fixed_point(p), ParameterError);
  p = RegimeParams{};
  p.theta1 = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(regime_discrete(p, 5), ParameterError);
}

TEST_CASE("regime discrete: decouples at zero switching") {
  const auto d = regime_discrete(figure4(0.0), 200);
  const auto c0 = solve_power_coefficients(1.5, 2.0, 0.1, 200);
  const auto c1 = solve_power_coefficients(0.5, 2.0, 0.1, 200);
  CHECK(d.u[0] == 0.0);
  CHECK(d.w[0] == 0.0);
  for (std::size_t n = 1; n <= 200; ++n) {
    CHECK(d.u[n] == doctest::Approx(c0.c[n]).epsilon(1e-12));
    CHECK(d.w[n] == doctest::Approx(c1.c[n]).epsilon(1e-12));
  }
}

TEST_CASE("regime discrete: ordering, residuals and fluid consistency") {
  for (double theta : {0.05, 1.0, 20.0}) {
    const std::size_t n_max = 20000;
    const auto d = regime_discrete(figure4(theta), n_max);
    CHECK(d.max_residual <= 1e-10);
    for (std::size_t n = 1; n <= n_max; n += 97) CHECK(d.u[n] > d.w[n]);
    const auto fp = regime_fluid_fixed_point(figure4(theta));
    const double scale = std::sqrt(static_cast<double>(n_max));
    CHECK(d.u[n_max] / (fp.c0 * scale) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(d.w[n_max] / (fp.c1 * scale) == doctest::Approx(1.0).epsilon(1e-2));
  }
}

TEST_CASE("two exchanges: no block exchange reproduces the single-exchange value") {
  TwoExchangeParams p;
  p.lambda1 = 0.0;
  const auto sol = two_exchange_patch(p);
  double worst = 0.0;
  for (std::size_t i = 0; i < sol.x.size(); ++i) worst = std::max(worst, std::abs(sol.v[i] - sol.v0[i]));
  CHECK(worst <= 1e-8);
  CHECK(sol.max_residual <= 1e-6);
}

TEST_CASE("two exchanges: block exchange adds value, residual and seed checks") {
  TwoExchangeParams p;
  const auto sol = two_exchange_patch(p);
  CHECK(sol.x_seed == doctest::Approx(0.01));
  for (std::size_t i = 0; i < sol.x.size(); ++i) {
    CHECK(sol.v[i] >= sol.v0[i]);
    CHECK(sol.v0[i] == doctest::Approx(v0_of(p, sol.x[i])).epsilon(1e-14));
  }
  CHECK(sol.max_residual <= 1e-6);
  CHECK(sol.seed_sensitivity < 1e-6);
}

TEST_CASE("two exchanges: continuity across knots and positive spreads") {
  TwoExchangeParams p;
  p.lambda1 = 0.2;
  const auto sol = two_exchange_patch(p);
  const double h = p.grid_step;
  for (double knot : {1.0, 2.0}) {
    const auto i = static_cast<std::size_t>(std::llround(knot / h));
    // Jumps between neighbours stay of order h times the local slope.
    const double slope = std::max(sol.spread0[i - 1], sol.spread0[i + 1]);
    CHECK(std::abs(sol.v[i + 1] - sol.v[i]) < 2.0 * slope * h);
    CHECK(std::abs(sol.v[i] - sol.v[i - 1]) < 2.0 * slope * h);
  }
  for (std::size_t i = 1; i < sol.x.size(); ++i) {
    CHECK(sol.spread0[i] > 0.0);
    CHECK(sol.spread1[i] > 0.0);
  }
}

TEST_CASE("two exchanges: spreads recovered from the value") {
  TwoExchangeParams p;
  p.lambda1 = 0.1;
  const auto sol = two_exchange_patch(p);
  const double h = p.grid_step, a = p.alpha;
  for (std::size_t i = 1500; i < 1600; i += 7) {
    const double dv = (sol.v[i + 1] - sol.v[i - 1]) / (2.0 * h);
    CHECK(sol.spread0[i] == doctest::Approx(a / (a - 1.0) * dv).epsilon(1e-5));
    const double dd = sol.v[i] - sol.v[i - 1000];
    CHECK(sol.spread1[i] == doctest::Approx(a / (a - 1.0) * dd).epsilon(1e-12));
  }
}

TEST_CASE("two exchanges: validation") {
  TwoExchangeParams p;
  p.grid_step = 0.3;
  CHECK_THROWS_AS(two_exchange_patch(p), ParameterError);
  p = TwoExchangeParams{};
  p.x_seed = 2.0;
  CHECK_THROWS_AS(two_exchange_patch(p), ParameterError);
  p = TwoExchangeParams{};
  p.alpha = 1.0;
  CHECK_THROWS_AS(two_exchange_patch(p), ParameterError);
}

TEST_CASE("two exchanges: first-order term solves its linear equation") {
  TwoExchangeParams p;
  p.alpha = 2.5;
  const double a = p.alpha, r = p.r, d = p.delta_block, pw = (a - 1.0) / a;
  const double big_a = std::pow(a - 1.0, a - 1.0) / std::pow(a, a);
  const double k = std::pow(p.lambda0 / (a * r), 1.0 / a);
  for (double x : {0.3, 0.9, 1.4, 2.2, 2.9}) {
    const double h = 1e-4;
    const double v1 = two_exchange_first_order(p, x);
    const double dv1 = (two_exchange_first_order(p, x + h) - two_exchange_first_order(p, x - h)) / (2.0 * h);
    const double gap = std::pow(x, pw) - std::pow(std::max(0.0, x - d), pw);
    const double source = big_a * p.lambda1 * std::pow(std::min(x, d), a) * std::pow(k, 1.0 - a) * std::pow(gap, 1.0 - a);
    CHECK(std::abs(-a * r * x * dv1 + source - r * v1) < 1e-7);
  }
  CHECK(two_exchange_expansion(p, 0.0, {0.5, 2.0})[1] == doctest::Approx(k * std::pow(2.0, pw)).epsilon(1e-15));
}

TEST_CASE("two exchanges: first-order term matches a direct quadrature past the knot") {
  TwoExchangeParams p;
  const double a = p.alpha, r = p.r, d = p.delta_block, pw = (a - 1.0) / a;
  const double big_a = std::pow(a - 1.0, a - 1.0) / std::pow(a, a);
  const double k = std::pow(p.lambda0 / (a * r), 1.0 / a);
  const double s0 = big_a * p.lambda1 * std::pow(k, 1.0 - a);
  // Substitute y = d + u^2 to remove the square-root kink at the knot.
  const auto f = [&](double u) {
    const double y = d + u * u;
    const double gap = std::pow(y, pw) - std::pow(y - d, pw);
    return 2.0 * u * std::pow(y, 1.0 / a - 1.0) * s0 * std::pow(d, a) * std::pow(gap, 1.0 - a) / (a * r);
  };
  const double x = 2.5;
  const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::sqrt(x - d), 15, 1e-14);
  const double expected = std::pow(x, -1.0 / a) * (s0 * d * d / (2.0 * a * r) + tail);
  CHECK(two_exchange_first_order(p, x) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("two exchanges: expansion error is second order") {
  TwoExchangeParams p;
  p.lambda1 = 1.0;  // lambda_bar
  const double e1 = max_expansion_error(p, 0.04);
  const double e2 = max_expansion_error(p, 0.02);
  const double ratio = e1 / e2;
  MESSAGE("expansion error ratio " << ratio);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}
