#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lobliq/discrete_solver.hpp"
#include "lobliq/intensity.hpp"

namespace lobliq {

/// Spread rule as a function of inventory (in units) and time to maturity.
/// Time to maturity is +infinity on the infinite horizon.
using SpreadRule = std::function<double(std::size_t units, double time_to_go)>;

/// Exact sampler for the next fill. Given the current inventory, the current
/// time and an Exp(1) draw, returns the fill time, or +infinity when the
/// integrated hazard up to the horizon is below the draw.
using FillSampler = std::function<double(std::size_t units, double now, double exp_draw)>;

struct Policy {
  SpreadRule spread;
  bool stationary = false;  // spread ignores time: waiting times are exponential
  FillSampler sampler;      // optional closed-form inversion
};

/// Optimal power-law policy with the closed-form hazard inversion
///   tau = T - log1p(expm1(k (T - t)) e^{-k E / C_n}) / k,  k = alpha r,
/// where the fill rate is C_n / (1 - e^{-k (T - t)}).
Policy power_optimal_policy(const PowerCoefficients& coeffs, const Horizon& horizon);

/// Optimal exponential policy for r = 0 on a finite horizon. The fill rate is
/// -d/dt log P_n(z(t)) with z = lambda (T - t) / (delta e), so the hazard inverts
/// through a scalar root of log P_n.
Policy exp_finite_optimal_policy(double lambda, double kappa, double delta, double horizon);

/// Stationary policy posting s0(n delta) from the fluid limit.
Policy fluid_stationary_policy(const IntensityModel& model, double r, double delta);

/// Wraps an arbitrary spread rule. Fill times are sampled by quadrature of
/// the hazard and a monotone root find unless the rule is stationary.
Policy generic_policy(SpreadRule rule, bool stationary = false);

struct SimPath {
  std::uint64_t seed = 0;
  std::vector<double> fill_times;
  std::vector<double> fill_spreads;
  double discounted_revenue = 0.0;
  bool fully_liquidated = false;
  double terminal_inventory = 0.0;
};

struct SimulationSpec {
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<double> time_grid;  // times at which the mean inventory is recorded
  bool keep_paths = false;
};

struct EnsembleStats {
  std::size_t n_paths = 0;
  double mean_revenue = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n_paths)
  double liquidation_fraction = 0.0;
  std::vector<double> time_grid;
  std::vector<double> mean_inventory;
  std::vector<double> inventory_std_error;
  std::vector<SimPath> paths;  // filled when keep_paths is set
};

/// Monte Carlo of the controlled death process starting from n_units units of
/// size delta. Paths are grouped in fixed blocks reduced in order, so the
/// statistics do not depend on the thread count.
EnsembleStats simulate_policy(const IntensityModel& model, const MarketParams& market, std::size_t n_units,
                              double delta, const Policy& policy, const SimulationSpec& spec);

/// Single path; exposed for tests and dumps.
SimPath simulate_path(const IntensityModel& model, const MarketParams& market, std::size_t n_units, double delta,
                      const Policy& policy, std::uint64_t path_seed);

/// Per-path seed derived from the root seed by a splitmix64 step.
std::uint64_t path_seed(std::uint64_t root_seed, std::uint64_t path_index);

/// Value of a stationary spread rule inside the discrete problem, without
/// Monte Carlo: V~(n) = q (s delta + V~(n-1)), q = Lambda(s)/(Lambda(s) + r delta),
/// s = rule(n). Index 0 is 0.
std::vector<double> evaluate_stationary_policy_exact(const IntensityModel& model, double r, double delta,
                                                     std::size_t n_units, const SpreadRule& rule);

/// The same recursion with s = s0(n delta), the fluid spread at the inventory
/// held before the trade.
std::vector<double> evaluate_fluid_policy_exact(const IntensityModel& model, double r, double delta,
                                                std::size_t n_units);

/// Fill intensity (fills per unit time, already divided by delta) at inventory
/// `units` and time to maturity `time_to_go`.
using FillRate = std::function<double(std::size_t units, double time_to_go)>;

struct ExecutionCurve {
  double delta = 1.0;
  double horizon = 0.0;
  double cutoff = 0.0;                    // integration stops at T - cutoff
  std::vector<double> times;
  std::vector<std::vector<double>> mean;  // mean[n][i]: E(n delta, times[i])
  std::vector<double> trading_rate;       // -dE/dt at the top level
};

/// Solves dE(n,t)/dt = rate(n, T - t) (E(n-1,t) - E(n,t)), E(n,0) = n delta,
/// E(0,t) = 0, by RK4 in sigma with t = T (1 - e^{-sigma}). Times at or past
/// T - cutoff are clamped to T - cutoff. `steps_per_unit_sigma` sets the resolution.
ExecutionCurve execution_curve_ode(const FillRate& rate, std::size_t n_units, double delta, double horizon,
                                   const std::vector<double>& time_grid, double cutoff,
                                   std::size_t steps_per_unit_sigma = 400);

/// Optimal-policy execution curve for the closed-form books: power law with
/// r > 0, or exponential with r = 0. Default cutoff is 1e-9 T.
ExecutionCurve optimal_execution_curve(const IntensityModel& model, const MarketParams& market, std::size_t n_units,
                                       double delta, const std::vector<double>& time_grid, double cutoff = -1.0);

/// Optimal fill rate of the closed-form books, for ODE use and plotting.
FillRate optimal_fill_rate(const IntensityModel& model, const MarketParams& market, std::size_t n_units,
                           double delta);

}  // namespace lobliq
