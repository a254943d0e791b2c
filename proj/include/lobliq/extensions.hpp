#pragma once

#include <cstddef>
#include <vector>

namespace lobliq {

/// Two-state liquidity regimes for a power-law book: state 0 is active (lambda0),
/// state 1 is slow (lambda1). theta0 is the 0 -> 1 rate, theta1 the 1 -> 0 rate.
/// A rate of +infinity is accepted and handled analytically.
struct RegimeParams {
  double lambda0 = 1.5;
  double lambda1 = 0.5;
  double theta0 = 1.0;
  double theta1 = 1.0;
  double r = 0.1;
  double alpha = 2.0;

  void validate() const;
};

/// u(x) = c0 x^p and w(x) = c1 x^p with p = (alpha-1)/alpha.
struct RegimeFixedPoint {
  double c0 = 0.0;
  double c1 = 0.0;
  double lower = 0.0;  // (lambda1/(r alpha))^{1/alpha}
  double upper = 0.0;  // (lambda0/(r alpha))^{1/alpha}
  // lambda_i/alpha c_i^{1-alpha} - (r + theta_i) c_i + theta_i c_j
  double residual0 = 0.0;
  double residual1 = 0.0;
  // The same equations solved for c_j, i.e. divided by theta_i. Zero when theta_i is 0 or infinite.
  double divided_residual0 = 0.0;
  double divided_residual1 = 0.0;
};

/// Nested scalar roots: c0(c1) solves the first equation on [c1, upper], then
/// c1 solves the second on [lower, upper].
RegimeFixedPoint regime_fluid_fixed_point(const RegimeParams& params);

struct RegimeThetaRow {
  double theta = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
};

/// c_i* over symmetric switching rates theta0 = theta1 = theta.
std::vector<RegimeThetaRow> regime_theta_sweep(RegimeParams params, const std::vector<double>& thetas);

struct RegimeDiscrete {
  std::vector<double> u;  // active regime, u[0] = 0
  std::vector<double> w;  // slow regime, w[0] = 0
  double max_residual = 0.0;  // max over levels and both equations, relative to r U(n), r W(n)
};

/// Coupled recursions per level n:
///   A lambda0 (U(n) - U(n-1))^{1-alpha} - r U(n) + theta0 (W(n) - U(n)) = 0
///   A lambda1 (W(n) - W(n-1))^{1-alpha} - r W(n) + theta1 (U(n) - W(n)) = 0
/// Requires finite theta.
RegimeDiscrete regime_discrete(const RegimeParams& params, std::size_t n_max);

/// Continuous exchange with power-law depth lambda0 plus a block exchange
/// filling min(delta, x) at once with depth lambda1.
struct TwoExchangeParams {
  double lambda0 = 1.0;
  double lambda1 = 0.05;
  double delta_block = 1.0;
  double alpha = 2.0;
  double r = 0.1;
  double x_max = 3.0;
  double grid_step = 1e-3;
  double x_seed = -1.0;  // <= 0 selects min(delta, x_max) / 100

  void validate() const;
};

struct TwoExchangeSolution {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> v0;       // single-exchange value (lambda0 / (alpha r))^{1/alpha} x^p
  std::vector<double> spread0;  // continuous exchange: alpha/(alpha-1) v'(x)
  std::vector<double> spread1;  // block exchange: alpha/(alpha-1) (v(x) - v((x-delta)+)) / min(x, delta)
  double x_seed = 0.0;
  double max_residual = 0.0;    // delay ODE residual at grid points away from knots and the seed
  double seed_sensitivity = 0.0;  // |v(x_max) - v(x_max) with x_seed halved|, filled by two_exchange_patch
};

/// Method of steps for
///   A lambda0 v'^{1-alpha} + A lambda1 (x ^ delta)^alpha (v(x) - v((x-delta)+))^{1-alpha} - r v = 0.
/// Integrates w = v^{alpha/(alpha-1)}, which is linear in x for the single-exchange
/// solution, by RK4 from x_seed. On [0, x_seed] the seed is v0 + lambda1 v1/lambda1-bar,
/// the first-order expansion. Delayed values come from cubic Hermite interpolation.
TwoExchangeSolution two_exchange_patch(const TwoExchangeParams& params, bool check_seed = true);

/// First-order term v1 of v = v0 + eps v1 + O(eps^2) with lambda1 = lambda_bar eps.
/// `params.lambda1` is read as lambda_bar.
double two_exchange_first_order(const TwoExchangeParams& params, double x);

/// v0(x) + eps v1(x) on the given abscissae.
std::vector<double> two_exchange_expansion(const TwoExchangeParams& params, double eps, const std::vector<double>& xs);

}  // namespace lobliq
