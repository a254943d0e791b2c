#include "lobliq/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include <boost/version.hpp>

#include "json.hpp"
#include "lobliq/convergence.hpp"
#include "lobliq/discrete_solver.hpp"
#include "lobliq/errors.hpp"
#include "lobliq/extensions.hpp"
#include "lobliq/fluid_limit.hpp"
#include "lobliq/intensity.hpp"
#include "lobliq/simulator.hpp"

namespace lobliq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

IntensityModel model_of(const RunConfig& c) {
  if (c.model.variant == "power") return IntensityModel::power_law(c.model.lambda, c.model.alpha);
  return IntensityModel::exp_decay(c.model.lambda, c.model.kappa);
}

MarketParams market_of(const RunConfig& c) {
  MarketParams m;
  m.r = c.market.r;
  m.horizon = std::isinf(c.market.horizon) ? Horizon::infinite() : Horizon::finite(c.market.horizon);
  m.validate();
  return m;
}

Table make_table(std::string name, std::string title, std::vector<Column> columns) {
  Table t;
  t.name = std::move(name);
  t.title = std::move(title);
  t.columns = std::move(columns);
  return t;
}

std::vector<double> x_grid(double x_max, std::size_t points) {
  std::vector<double> xs;
  for (std::size_t i = 1; i <= points; ++i) xs.push_back(x_max * static_cast<double>(i) / static_cast<double>(points));
  return xs;
}

std::vector<double> time_grid(double horizon, std::size_t points) {
  std::vector<double> ts;
  for (std::size_t i = 0; i <= points; ++i) ts.push_back(horizon * static_cast<double>(i) / static_cast<double>(points));
  return ts;
}

std::vector<Table> run_solve(const RunConfig& c) {
  const auto market = market_of(c);
  const auto& d = c.discretization;
  auto t = make_table("solve", "Discrete value and optimal spread by inventory level",
                      {{"n", "inventory level"},
                       {"x", "inventory n * delta"},
                       {"coefficient", "c_n (power, r > 0), d_n (power, r = 0), NaN otherwise"},
                       {"value", "V(n delta) at the configured horizon"},
                       {"spread", "optimal spread at level n; NaN at n = 0"},
                       {"residual", "relative residual of the defining recursion; NaN where not applicable"}});
  if (c.model.variant == "power") {
    if (market.r > 0.0) {
      const auto coeffs = solve_power_coefficients(c.model.lambda, c.model.alpha, market.r, d.n_max, d.delta);
      t.add_row({0, 0, 0, 0, kNaN, kNaN});
      for (std::size_t n = 1; n <= d.n_max; ++n) {
        const auto vs = power_value_and_spread(n, market.horizon, coeffs);
        t.add_row({double(n), n * d.delta, coeffs.c[n], vs.value, vs.spread, coeffs.relative_residual(n)});
      }
    } else {
      const auto zr = solve_power_zero_rate(c.model.lambda, c.model.alpha, d.n_max, d.delta);
      const double horizon = market.horizon.time();
      t.add_row({0, 0, 0, 0, kNaN, kNaN});
      for (std::size_t n = 1; n <= d.n_max; ++n)
        t.add_row({double(n), n * d.delta, zr.d[n], zr.value(n, horizon), zr.spread(n, horizon), zr.relative_residual(n)});
    }
  } else if (market.horizon.is_infinite()) {
    const auto sol = solve_exp_infinite(d.n_max * d.delta, d.delta, c.model.lambda, c.model.kappa, market.r);
    for (std::size_t n = 0; n <= sol.n_max(); ++n)
      t.add_row({double(n), n * d.delta, kNaN, sol.values[n], sol.spreads[n], kNaN});
  } else {
    if (market.r != 0.0) throw ParameterError("solve: the exponential finite-horizon book is solved for r = 0 only");
    const double horizon = market.horizon.time();
    t.add_row({0, 0, kNaN, 0, kNaN, kNaN});
    for (std::size_t n = 1; n <= d.n_max; ++n)
      t.add_row({double(n), n * d.delta, kNaN, exp_finite_value(n, d.delta, horizon, c.model.lambda, c.model.kappa),
                 exp_finite_spread(n, d.delta, horizon, c.model.lambda, c.model.kappa), kNaN});
  }
  return {t};
}

std::vector<Table> run_fluid(const RunConfig& c) {
  const auto model = model_of(c);
  const auto market = market_of(c);
  auto t = make_table("fluid", "Fluid-limit value and spread",
                      {{"x", "inventory"}, {"value", "v(x)"}, {"spread", "s0(x)"}});
  for (double x : x_grid(c.discretization.x_max, c.discretization.x_points)) {
    const auto p = fluid_at(model, market, x);
    t.add_row({x, p.value, p.spread});
  }
  return {t};
}

std::vector<Table> run_converge(const RunConfig& c) {
  const auto model = model_of(c);
  const auto market = market_of(c);
  const auto& d = c.discretization;
  const auto rep = value_convergence(model, market, d.x_probe, d.ladder_start, d.ladder_levels - 1, c.simulation.threads);
  const auto spreads = control_convergence(model, market, d.x_probe, rep.deltas);
  auto t = make_table("converge", "Discrete-to-fluid convergence at the probe inventory",
                      {{"k", "ladder index"},
                       {"delta", "ladder_start * 2^-k"},
                       {"value", "V^delta(x_probe)"},
                       {"fluid_value", "v(x_probe)"},
                       {"ratio", "V^delta / v"},
                       {"spread", "s^(delta)(x_probe)"},
                       {"fluid_spread", "s0(x_probe)"},
                       {"spread_error", "|s^(delta) - s0|"},
                       {"averaged_spread", "(1/delta) integral of s0 over [x - delta, x]"},
                       {"averaged_error", "|s^(delta) - averaged_spread|"}});
  for (std::size_t k = 0; k < rep.deltas.size(); ++k) {
    t.add_row({double(k), rep.deltas[k], rep.values[k], rep.fluid_value, rep.ratios[k], rep.spreads[k],
               rep.fluid_spread, rep.spread_errors[k], spreads.averaged[k], spreads.averaged_errors[k]});
  }
  auto s = make_table("converge_summary", "Convergence checks (1 = holds)",
                      {{"monotone", "V^delta strictly increasing down the ladder"},
                       {"bounded", "V^delta <= v"},
                       {"pointwise_decreasing", "spread errors fall along the ladder"},
                       {"averaged_closer", "cell average closer than the pointwise spread at every rung"},
                       {"rate_estimate", "last empirical order log2(err_{k-1}/err_k)"}});
  s.add_row({double(rep.monotone_ok), double(rep.bounded_ok), double(spreads.pointwise_decreasing),
             double(spreads.averaged_closer), rep.rate_estimate});
  return {t, s};
}

Policy optimal_policy(const RunConfig& c, const MarketParams& market) {
  const auto& d = c.discretization;
  const std::size_t units = c.simulation.units;
  if (c.model.variant == "power") {
    const auto coeffs = solve_power_coefficients(c.model.lambda, c.model.alpha, market.r, units, d.delta);
    return power_optimal_policy(coeffs, market.horizon);
  }
  if (!market.horizon.is_infinite()) {
    if (market.r != 0.0) throw ParameterError("the exponential finite-horizon policy is available for r = 0 only");
    return exp_finite_optimal_policy(c.model.lambda, c.model.kappa, d.delta, market.horizon.time());
  }
  const auto sol = solve_exp_infinite(units * d.delta, d.delta, c.model.lambda, c.model.kappa, market.r);
  return generic_policy([spreads = sol.spreads](std::size_t n, double) { return spreads.at(n); }, true);
}

// The deterministic curve reaches zero exactly at maturity.
double trade_curve_or_zero(double t, double x0, const Horizon& horizon, double alpha, double r) {
  return t >= horizon.time() ? 0.0 : power_trade_curve(t, x0, horizon, alpha, r);
}

double simulation_span(const MarketParams& market) {
  return market.horizon.is_infinite() ? 5.0 / market.r : market.horizon.time();
}

std::vector<Table> run_simulate(const RunConfig& c) {
  const auto model = model_of(c);
  const auto market = market_of(c);
  const auto& sim = c.simulation;
  const double delta = c.discretization.delta;
  const auto policy = optimal_policy(c, market);
  SimulationSpec spec;
  spec.n_paths = sim.paths;
  spec.seed = sim.seed;
  spec.threads = sim.threads;
  spec.time_grid = time_grid(simulation_span(market), sim.time_points);
  const auto stats = simulate_policy(model, market, sim.units, delta, policy, spec);
  const double exact = discrete_at(model, market, sim.units * delta, delta).value;

  auto s = make_table("simulate_summary", "Monte Carlo of the optimal policy",
                      {{"paths", "number of paths"},
                       {"mean_revenue", "mean discounted revenue"},
                       {"std_error", "standard error of the mean"},
                       {"exact_value", "V(units * delta) from the discrete solver"},
                       {"z_score", "(mean_revenue - exact_value) / std_error"},
                       {"liquidation_fraction", "fraction of paths fully liquidated"}});
  s.add_row({double(stats.n_paths), stats.mean_revenue, stats.std_error, exact,
             stats.std_error > 0 ? (stats.mean_revenue - exact) / stats.std_error : kNaN, stats.liquidation_fraction});
  auto inv = make_table("simulate_inventory", "Mean remaining inventory",
                        {{"t", "elapsed time"}, {"mean_inventory", "sample mean"}, {"std_error", "standard error"}});
  for (std::size_t i = 0; i < stats.time_grid.size(); ++i)
    inv.add_row({stats.time_grid[i], stats.mean_inventory[i], stats.inventory_std_error[i]});
  return {s, inv};
}

std::vector<Table> run_curves(const RunConfig& c) {
  const auto model = model_of(c);
  const auto market = market_of(c);
  if (market.horizon.is_infinite()) throw ParameterError("curves: a finite horizon is required");
  const auto& sim = c.simulation;
  const double delta = c.discretization.delta, horizon = market.horizon.time();
  const auto grid = time_grid(horizon, sim.time_points);
  const auto curve = optimal_execution_curve(model, market, sim.units, delta, grid);

  SimulationSpec spec;
  spec.n_paths = sim.paths;
  spec.seed = sim.seed;
  spec.threads = sim.threads;
  spec.time_grid = grid;
  const auto stats = simulate_policy(model, market, sim.units, delta, optimal_policy(c, market), spec);

  const double x0 = sim.units * delta;
  auto t = make_table("curves", "Execution curve: ODE mean inventory against Monte Carlo",
                      {{"t", "elapsed time"},
                       {"ode_mean", "E(x0, t) from the triangular ODE system"},
                       {"mc_mean", "Monte Carlo mean inventory"},
                       {"mc_std_error", "Monte Carlo standard error"},
                       {"trading_rate", "-dE/dt"},
                       {"linear_baseline", "x0 (1 - t / T)"},
                       {"fluid_curve", "deterministic fluid trade curve (power law); NaN otherwise"}});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double fluid = c.model.variant == "power"
                             ? trade_curve_or_zero(grid[i], x0, market.horizon, c.model.alpha, market.r)
                             : kNaN;
    t.add_row({grid[i], curve.mean[sim.units][i], stats.mean_inventory[i], stats.inventory_std_error[i],
               curve.trading_rate[i], x0 * (1.0 - grid[i] / horizon), fluid});
  }
  return {t};
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> out;
  for (std::size_t i = 0; i < points; ++i)
    out.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * double(i) / double(points - 1)));
  return out;
}

RegimeParams regime_params(const RegimesSection& g) {
  RegimeParams p;
  p.lambda0 = g.lambda0;
  p.lambda1 = g.lambda1;
  p.theta0 = g.theta0;
  p.theta1 = g.theta1;
  p.r = g.r;
  p.alpha = g.alpha;
  return p;
}

Table theta_table(const RegimeParams& p, const std::vector<double>& thetas, std::string name) {
  auto t = make_table(std::move(name), "Regime value constants over symmetric switching rates",
                      {{"theta", "theta0 = theta1"}, {"c0", "active-regime constant"}, {"c1", "slow-regime constant"}});
  for (const auto& row : regime_theta_sweep(p, thetas)) t.add_row({row.theta, row.c0, row.c1});
  return t;
}

std::vector<Table> run_regimes(const RunConfig& c) {
  const auto& g = c.regimes;
  const auto p = regime_params(g);
  const auto fp = regime_fluid_fixed_point(p);
  auto f = make_table("regimes_fixed_point", "Fluid fixed point u = c0 x^p, w = c1 x^p",
                      {{"theta0", ""}, {"theta1", ""}, {"c0", ""}, {"c1", ""},
                       {"lower", "(lambda1/(r alpha))^(1/alpha)"}, {"upper", "(lambda0/(r alpha))^(1/alpha)"},
                       {"residual0", "first equation"}, {"residual1", "second equation"}});
  f.add_row({p.theta0, p.theta1, fp.c0, fp.c1, fp.lower, fp.upper, fp.residual0, fp.residual1});

  auto sweep = theta_table(p, log_grid(g.theta_min, g.theta_max, g.theta_points), "regimes_theta");

  std::vector<Table> out{f, sweep};
  if (std::isfinite(p.theta0) && std::isfinite(p.theta1)) {
    const auto disc = regime_discrete(p, g.n_max);
    const double pw = (p.alpha - 1.0) / p.alpha;
    auto t = make_table("regimes_discrete", "Discrete regime values",
                        {{"n", "inventory level"}, {"U", "active regime"}, {"W", "slow regime"},
                         {"fluid_U", "c0 n^p"}, {"fluid_W", "c1 n^p"}});
    for (std::size_t n = 0; n <= g.n_max; ++n) {
      const double np = std::pow(double(n), pw);
      t.add_row({double(n), disc.u[n], disc.w[n], fp.c0 * np, fp.c1 * np});
    }
    out.push_back(t);
  }
  return out;
}

std::vector<Table> run_exchanges(const RunConfig& c) {
  const auto& e = c.exchanges;
  TwoExchangeParams p;
  p.lambda0 = e.lambda0;
  p.lambda1 = e.lambda1;
  p.delta_block = e.delta;
  p.alpha = e.alpha;
  p.r = e.r;
  p.x_max = e.x_max;
  p.grid_step = e.grid_step;
  p.x_seed = e.x_seed;
  const auto sol = two_exchange_patch(p);
  TwoExchangeParams bar = p;
  bar.lambda1 = e.lambda1 / e.eps;
  const auto expansion = two_exchange_expansion(bar, e.eps, sol.x);

  auto t = make_table("exchanges", "Two-exchange value and spreads",
                      {{"x", "inventory"},
                       {"v", "value with both exchanges"},
                       {"v0", "single-exchange value"},
                       {"spread0", "continuous-exchange spread"},
                       {"spread1", "block-exchange spread"},
                       {"expansion", "v0 + eps v1 with lambda1 = lambda_bar eps"}});
  for (std::size_t i = 0; i < sol.x.size(); ++i)
    t.add_row({sol.x[i], sol.v[i], sol.v0[i], sol.spread0[i], sol.spread1[i], expansion[i]});
  auto s = make_table("exchanges_summary", "Two-exchange diagnostics",
                      {{"x_seed", "end of the seeded region"},
                       {"max_residual", "delay ODE residual away from knots"},
                       {"seed_sensitivity", "|change in v(x_max)| when x_seed is halved"}});
  s.add_row({sol.x_seed, sol.max_residual, sol.seed_sensitivity});
  return {t, s};
}

// Figure tables use fixed published parameter sets rather than the config.
std::vector<Table> run_figure(const RunConfig& c) {
  const auto& d = c.discretization;
  switch (c.figure) {
    case 1: {
      const double r = 0.1;
      const auto s2 = stationary_fluid_spread(IntensityModel::power_law(1.0, 2.0), r);
      const auto s3 = stationary_fluid_spread(IntensityModel::power_law(1.0, 3.0), r);
      const auto se = stationary_fluid_spread(IntensityModel::exp_decay(std::exp(1.0), 1.0), r);
      auto t = make_table("figure1", "Fluid spreads for books normalized to Lambda(1) = 1, r = 0.1",
                          {{"x", "inventory"}, {"power2", "Lambda = s^-2"}, {"power3", "Lambda = s^-3"},
                           {"exponential", "Lambda = e^(1-s)"}});
      for (double x : x_grid(d.x_max, d.x_points)) t.add_row({x, s2(x), s3(x), se(x)});
      return {t};
    }
    case 2: {
      const double lambda = 1.0, alpha = 2.0, r = 0.1, x_end = 5.0;
      const auto model = IntensityModel::power_law(lambda, alpha);
      const std::vector<double> deltas{0.05, 0.01};
      std::vector<DiscreteSolution> sols;
      std::vector<std::vector<double>> tilde;
      for (double delta : deltas) {
        const auto n = static_cast<std::size_t>(std::llround(x_end / delta));
        sols.push_back(to_discrete_solution(solve_power_coefficients(lambda, alpha, r, n, delta)));
        tilde.push_back(evaluate_fluid_policy_exact(model, r, delta, n));
      }
      auto t = make_table("figure2", "Discrete against fluid, Lambda = s^-2, r = 0.1",
                          {{"x", "inventory, multiples of 0.05"},
                           {"v_ratio_005", "V^0.05 / v"}, {"v_ratio_001", "V^0.01 / v"},
                           {"tilde_ratio_005", "V~^0.05 / V^0.05 (fluid spreads used discretely)"},
                           {"tilde_ratio_001", "V~^0.01 / V^0.01"},
                           {"s_ratio_005", "s0 / s^(0.05)"}, {"s_ratio_001", "s0 / s^(0.01)"}});
      for (std::size_t i = 1; i <= 100; ++i) {
        const double x = 0.05 * double(i);
        const auto fluid = power_fluid(x, Horizon::infinite(), lambda, alpha, r);
        std::vector<double> row{x};
        std::vector<double> vr, tr, sr;
        for (std::size_t k = 0; k < deltas.size(); ++k) {
          const std::size_t n = grid_level(x, deltas[k]);
          vr.push_back(sols[k].values[n] / fluid.value);
          tr.push_back(tilde[k][n] / sols[k].values[n]);
          sr.push_back(fluid.spread / sols[k].spreads[n]);
        }
        row.insert(row.end(), vr.begin(), vr.end());
        row.insert(row.end(), tr.begin(), tr.end());
        row.insert(row.end(), sr.begin(), sr.end());
        t.add_row(row);
      }
      return {t};
    }
    case 3: {
      const double r = 0.1, horizon = 1.0, delta = 1.0;
      const std::size_t units = 6;
      MarketParams market;
      market.r = r;
      market.horizon = Horizon::finite(horizon);
      const auto grid = time_grid(horizon, 100);
      auto t = make_table("figure3", "Execution curves, X0 = 6, r = 0.1, T = 1",
                          {{"t", "elapsed time"}, {"E_alpha2", "Lambda = s^-2"}, {"E_alpha4", "Lambda = s^-4"},
                           {"fluid_alpha2", "deterministic trade curve, alpha = 2"},
                           {"fluid_alpha4", "deterministic trade curve, alpha = 4"},
                           {"baseline", "linear liquidation"}});
      const auto e2 = optimal_execution_curve(IntensityModel::power_law(1.0, 2.0), market, units, delta, grid);
      const auto e4 = optimal_execution_curve(IntensityModel::power_law(1.0, 4.0), market, units, delta, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x0 = units * delta;
        t.add_row({grid[i], e2.mean[units][i], e4.mean[units][i],
                   trade_curve_or_zero(grid[i], x0, market.horizon, 2.0, r),
                   trade_curve_or_zero(grid[i], x0, market.horizon, 4.0, r), x0 * (1.0 - grid[i] / horizon)});
      }
      return {t};
    }
    default: {
      RegimeParams p;  // lambda0 = 1.5, lambda1 = 0.5, r = 0.1, alpha = 2
      return {theta_table(p, log_grid(1e-3, 1e3, 61), "figure4")};
    }
  }
}

}  // namespace

std::vector<Table> compute_tables(const RunConfig& config) {
  validate_config(config);
  const auto& cmd = config.command;
  if (cmd == "solve") return run_solve(config);
  if (cmd == "fluid") return run_fluid(config);
  if (cmd == "converge") return run_converge(config);
  if (cmd == "simulate") return run_simulate(config);
  if (cmd == "curves") return run_curves(config);
  if (cmd == "regimes") return run_regimes(config);
  if (cmd == "exchanges") return run_exchanges(config);
  return run_figure(config);
}

RunOutcome run(const RunConfig& config) {
  RunOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  std::vector<Table> tables;
  try {
    tables = compute_tables(config);
  } catch (const ConfigError& err) {
    return {kExitConfig, std::string("config error: ") + err.what(), {}};
  } catch (const ParameterError& err) {
    return {kExitConfig, std::string(config.command) + ": invalid parameters: " + err.what(), {}};
  } catch (const std::domain_error& err) {
    return {kExitConfig, std::string(config.command) + ": invalid parameters: " + err.what(), {}};
  } catch (const NumericalError& err) {
    return {kExitNumerical, std::string(config.command) + ": numerical failure: " + err.what(), {}};
  } catch (const std::exception& err) {
    return {kExitNumerical, std::string(config.command) + ": failure: " + err.what(), {}};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    for (const auto& t : tables) {
      const auto files = emit_table(t, config.output.dir, config.output.format);
      outcome.files.insert(outcome.files.end(), files.begin(), files.end());
    }
    nlohmann::ordered_json manifest;
    manifest["schema"] = kManifestSchemaVersion;
    manifest["version"] = kVersion;
    manifest["boost_version"] = std::to_string(BOOST_VERSION / 100000) + "." +
                                std::to_string(BOOST_VERSION / 100 % 1000) + "." + std::to_string(BOOST_VERSION % 100);
    manifest["command"] = config.command;
    manifest["seed"] = config.simulation.seed;
    manifest["threads"] = config.simulation.threads;
    manifest["wall_time_seconds"] = seconds;
    manifest["config"] = serialize_config(config);
    manifest["outputs"] = outcome.files;
    write_file_atomic((std::filesystem::path(config.output.dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    outcome.files.push_back("manifest.json");
  } catch (const std::exception& err) {
    return {kExitFailure, std::string("output error: ") + err.what(), outcome.files};
  }
  return outcome;
}

}  // namespace lobliq
