#include "lobliq/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "lobliq/errors.hpp"
#include "lobliq/fluid_limit.hpp"
#include "lobliq/numerics.hpp"

namespace lobliq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBlockSize = 256;

// log(expm1(y)) for y > 0 without overflow.
double log_expm1(double y) { return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y)); }

// log1p(exp(y)) without overflow.
double log1p_exp(double y) { return y > 30.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

// log P_j(z) for j = 0..n, P_j the partial sums of z^i / i!.
std::vector<double> log_partial_sums(std::size_t n, double z) {
  std::vector<double> out(n + 1, 0.0);
  if (z <= 0.0) return out;
  const double log_z = std::log(z);
  double log_term = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    log_term += log_z - std::log(static_cast<double>(j));
    const double hi = std::max(out[j - 1], log_term);
    out[j] = hi + std::log(std::exp(out[j - 1] - hi) + std::exp(log_term - hi));
  }
  return out;
}

double unit_exponential(std::mt19937_64& rng) {
  // 53 random bits, u in [0, 1).
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return -std::log1p(-u);
}

double finite_horizon_time(const MarketParams& market) {
  return market.horizon.is_infinite() ? kInf : market.horizon.time();
}

double checked_spread(const Policy& policy, std::size_t units, double time_to_go) {
  const double s = policy.spread(units, time_to_go);
  if (std::isnan(s)) {
    std::ostringstream msg;
    msg << "simulator: policy returned NaN at " << units << " units";
    throw NumericalError(msg.str());
  }
  return s;
}

// Integrated hazard inversion by quadrature on intervals halving toward T.
// The hazard is integrated in time to go w = T - t, which keeps the spread
// rule free of cancellation near maturity.
double sample_by_quadrature(const IntensityModel& model, double horizon, double delta, const Policy& policy,
                            std::size_t units, double now, double exp_draw) {
  constexpr double kTol = 1e-10;
  const auto hazard = [&](double w) {
    const double lam = rate(model, checked_spread(policy, units, w)) / delta;
    if (!std::isfinite(lam)) throw NumericalError("simulator: non-finite fill rate inside the hazard integral");
    return lam;
  };
  const double w_now = horizon - now;
  double accumulated = 0.0;
  double w_hi = w_now;
  for (int j = 1; j <= 64; ++j) {
    const double w_lo = j == 64 ? 0.0 : w_now * std::ldexp(1.0, -j);
    const double piece = numerics::integrate(hazard, w_lo, w_hi, kTol);
    if (accumulated + piece >= exp_draw) {
      const double need = exp_draw - accumulated;
      const double top = w_hi;
      const double w = numerics::solve_monotone_root(
          [&](double ww) { return numerics::integrate(hazard, ww, top, kTol) - need; },
          {w_lo, w_hi, 1e-13 * std::max(1.0, w_hi)});
      return std::clamp(horizon - w, now, horizon);
    }
    accumulated += piece;
    w_hi = w_lo;
  }
  return kInf;
}

double next_fill(const IntensityModel& model, const MarketParams& market, double delta, const Policy& policy,
                 std::size_t units, double now, double exp_draw) {
  const double horizon = finite_horizon_time(market);
  if (policy.sampler) return policy.sampler(units, now, exp_draw);
  if (policy.stationary || market.horizon.is_infinite()) {
    const double lam = rate(model, checked_spread(policy, units, horizon - now)) / delta;
    if (!(lam > 0.0) || !std::isfinite(lam)) throw NumericalError("simulator: non-finite stationary fill rate");
    const double t = now + exp_draw / lam;
    return t <= horizon ? t : kInf;
  }
  return sample_by_quadrature(model, horizon, delta, policy, units, now, exp_draw);
}

void check_simulation(const MarketParams& market, double delta) {
  market.validate();
  if (!(delta > 0.0)) throw ParameterError("simulator: delta must be > 0");
}

template <class Fn>
void parallel_blocks(std::size_t blocks, unsigned threads, Fn&& body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b) body(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < blocks; b = next++) {
        try {
          body(b);
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

Policy power_optimal_policy(const PowerCoefficients& coeffs, const Horizon& horizon) {
  const double k = coeffs.alpha * coeffs.r;
  // Stationary fill rates C_n = (lambda/delta) s_n^{-alpha}.
  std::vector<double> c_rate(coeffs.c.size(), 0.0);
  for (std::size_t n = 1; n < coeffs.c.size(); ++n) {
    const double s = power_value_and_spread(n, Horizon::infinite(), coeffs).spread;
    c_rate[n] = coeffs.lambda / coeffs.delta * std::pow(s, -coeffs.alpha);
  }
  Policy p;
  p.spread = [coeffs](std::size_t units, double time_to_go) {
    const Horizon h = std::isinf(time_to_go) ? Horizon::infinite() : Horizon::finite(std::max(0.0, time_to_go));
    return power_value_and_spread(units, h, coeffs).spread;
  };
  if (horizon.is_infinite()) {
    p.stationary = true;
    p.sampler = [c_rate](std::size_t units, double now, double e) { return now + e / c_rate.at(units); };
  } else {
    const double t_end = horizon.time();
    p.sampler = [c_rate, k, t_end](std::size_t units, double now, double e) {
      const double remaining = t_end - now;
      if (!(remaining > 0.0)) return kInf;
      const double log_w = log_expm1(k * remaining) - k * e / c_rate.at(units);
      const double t = t_end - log1p_exp(log_w) / k;
      return std::clamp(t, now, t_end);
    };
  }
  return p;
}

Policy exp_finite_optimal_policy(double lambda, double kappa, double delta, double horizon) {
  if (!(lambda > 0.0) || !(kappa > 0.0) || !(delta > 0.0) || !(horizon > 0.0))
    throw ParameterError("exponential policy: lambda, kappa, delta and T must be > 0");
  const double z_rate = lambda / (delta * std::numbers::e);  // dz/d(time to go)
  Policy p;
  p.spread = [=](std::size_t units, double time_to_go) {
    const auto lp = log_partial_sums(units, z_rate * std::max(0.0, time_to_go));
    return (1.0 + lp[units] - lp[units - 1]) / kappa;
  };
  p.sampler = [=](std::size_t units, double now, double e) {
    const double z0 = z_rate * (horizon - now);
    if (!(z0 > 0.0)) return kInf;
    const double target = log_partial_sums(units, z0)[units] - e;
    if (target <= 0.0) return kInf;
    const double z = numerics::solve_monotone_root(
        [units, target](double zz) { return log_partial_sums(units, zz)[units] - target; }, {0.0, z0, 1e-15 * z0});
    return std::clamp(horizon - z / z_rate, now, horizon);
  };
  return p;
}

Policy fluid_stationary_policy(const IntensityModel& model, double r, double delta) {
  const auto s0 = stationary_fluid_spread(model, r);
  Policy p;
  p.stationary = true;
  p.spread = [s0, delta](std::size_t units, double) { return s0(static_cast<double>(units) * delta); };
  return p;
}

Policy generic_policy(SpreadRule rule, bool stationary) {
  if (!rule) throw ParameterError("generic policy: missing spread rule");
  Policy p;
  p.spread = std::move(rule);
  p.stationary = stationary;
  return p;
}

std::uint64_t path_seed(std::uint64_t root_seed, std::uint64_t path_index) {
  std::uint64_t z = root_seed + 0x9E3779B97F4A7C15ULL * (path_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SimPath simulate_path(const IntensityModel& model, const MarketParams& market, std::size_t n_units, double delta,
                      const Policy& policy, std::uint64_t seed) {
  SimPath path;
  path.seed = seed;
  std::mt19937_64 rng(seed);
  const double horizon = finite_horizon_time(market);
  double now = 0.0;
  std::size_t units = n_units;
  while (units > 0) {
    const double t = next_fill(model, market, delta, policy, units, now, unit_exponential(rng));
    if (!std::isfinite(t) || t > horizon) break;
    const double s = checked_spread(policy, units, horizon - t);
    if (!std::isfinite(s)) throw NumericalError("simulator: non-finite spread at a fill");
    path.fill_times.push_back(t);
    path.fill_spreads.push_back(s);
    path.discounted_revenue += std::exp(-market.r * t) * s * delta;
    now = t;
    --units;
  }
  path.fully_liquidated = units == 0;
  path.terminal_inventory = static_cast<double>(units) * delta;
  return path;
}

EnsembleStats simulate_policy(const IntensityModel& model, const MarketParams& market, std::size_t n_units,
                              double delta, const Policy& policy, const SimulationSpec& spec) {
  check_simulation(market, delta);
  if (spec.n_paths == 0) throw ParameterError("simulator: n_paths must be >= 1");
  if (!policy.spread) throw ParameterError("simulator: policy has no spread rule");
  const std::size_t grid = spec.time_grid.size();
  const std::size_t blocks = (spec.n_paths + kBlockSize - 1) / kBlockSize;

  struct Block {
    std::vector<double> revenue;
    std::size_t liquidated = 0;
    std::vector<double> inv_sum, inv_sq;
    std::vector<SimPath> paths;
  };
  std::vector<Block> partial(blocks);

  parallel_blocks(blocks, spec.threads, [&](std::size_t b) {
    Block& blk = partial[b];
    blk.inv_sum.assign(grid, 0.0);
    blk.inv_sq.assign(grid, 0.0);
    const std::size_t first = b * kBlockSize;
    const std::size_t last = std::min(spec.n_paths, first + kBlockSize);
    for (std::size_t i = first; i < last; ++i) {
      SimPath path = simulate_path(model, market, n_units, delta, policy, path_seed(spec.seed, i));
      blk.revenue.push_back(path.discounted_revenue);
      if (path.fully_liquidated) ++blk.liquidated;
      for (std::size_t g = 0; g < grid; ++g) {
        const auto fills = std::upper_bound(path.fill_times.begin(), path.fill_times.end(), spec.time_grid[g]) -
                           path.fill_times.begin();
        const double inv = static_cast<double>(n_units - static_cast<std::size_t>(fills)) * delta;
        blk.inv_sum[g] += inv;
        blk.inv_sq[g] += inv * inv;
      }
      if (spec.keep_paths) blk.paths.push_back(std::move(path));
    }
  });

  EnsembleStats out;
  out.n_paths = spec.n_paths;
  out.time_grid = spec.time_grid;
  const double n = static_cast<double>(spec.n_paths);
  double total = 0.0;
  std::size_t liquidated = 0;
  std::vector<double> inv_sum(grid, 0.0), inv_sq(grid, 0.0);
  for (const auto& blk : partial) {
    for (double v : blk.revenue) total += v;
    liquidated += blk.liquidated;
    for (std::size_t g = 0; g < grid; ++g) {
      inv_sum[g] += blk.inv_sum[g];
      inv_sq[g] += blk.inv_sq[g];
    }
  }
  out.mean_revenue = total / n;
  double ss = 0.0;
  for (const auto& blk : partial) {
    for (double v : blk.revenue) ss += (v - out.mean_revenue) * (v - out.mean_revenue);
  }
  out.std_error = spec.n_paths > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  out.liquidation_fraction = static_cast<double>(liquidated) / n;
  for (std::size_t g = 0; g < grid; ++g) {
    const double mean = inv_sum[g] / n;
    const double var = spec.n_paths > 1 ? std::max(0.0, (inv_sq[g] - n * mean * mean) / (n - 1.0)) : 0.0;
    out.mean_inventory.push_back(mean);
    out.inventory_std_error.push_back(std::sqrt(var / n));
  }
  if (spec.keep_paths) {
    for (auto& blk : partial) {
      for (auto& p : blk.paths) out.paths.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<double> evaluate_stationary_policy_exact(const IntensityModel& model, double r, double delta,
                                                     std::size_t n_units, const SpreadRule& rule) {
  if (!(r > 0.0)) throw ParameterError("policy evaluation: r must be > 0");
  if (!(delta > 0.0)) throw ParameterError("policy evaluation: delta must be > 0");
  std::vector<double> v(n_units + 1, 0.0);
  for (std::size_t n = 1; n <= n_units; ++n) {
    const double s = rule(n, kInf);
    const double lam = rate(model, s);
    const double q = lam / (lam + r * delta);
    v[n] = q * (s * delta + v[n - 1]);
  }
  return v;
}

std::vector<double> evaluate_fluid_policy_exact(const IntensityModel& model, double r, double delta,
                                                std::size_t n_units) {
  const auto s0 = stationary_fluid_spread(model, r);
  return evaluate_stationary_policy_exact(model, r, delta, n_units,
                                          [&](std::size_t n, double) { return s0(static_cast<double>(n) * delta); });
}

ExecutionCurve execution_curve_ode(const FillRate& rate_fn, std::size_t n_units, double delta, double horizon,
                                   const std::vector<double>& time_grid, double cutoff,
                                   std::size_t steps_per_unit_sigma) {
  if (n_units == 0) throw ParameterError("execution curve: n_units must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("execution curve: finite T > 0 required");
  if (!(cutoff > 0.0) || !(cutoff < horizon)) throw ParameterError("execution curve: need 0 < cutoff < T");
  if (!std::is_sorted(time_grid.begin(), time_grid.end()) || (!time_grid.empty() && time_grid.front() < 0.0))
    throw ParameterError("execution curve: time grid must be sorted and >= 0");

  ExecutionCurve out;
  out.delta = delta;
  out.horizon = horizon;
  out.cutoff = cutoff;
  out.mean.assign(n_units + 1, {});

  // State y[n-1] = E(n delta, t). Time change t = T (1 - e^{-sigma}), dt = (T - t) dsigma.
  numerics::OdeProblem problem;
  problem.dimension = n_units;
  problem.right_hand_side = [&](double sigma, std::span<const double> y, std::span<double> dy) {
    const double to_go = horizon * std::exp(-sigma);
    for (std::size_t n = 1; n <= n_units; ++n) {
      const double below = n == 1 ? 0.0 : y[n - 2];
      dy[n - 1] = to_go * rate_fn(n, to_go) * (below - y[n - 1]);
    }
  };
  std::vector<double> state(n_units);
  for (std::size_t n = 1; n <= n_units; ++n) state[n - 1] = static_cast<double>(n) * delta;

  const double t_max = horizon - cutoff;
  double sigma_prev = 0.0;
  std::vector<double> dy(n_units);
  for (double t_req : time_grid) {
    const double t = std::min(t_req, t_max);
    const double sigma = -std::log1p(-t / horizon);
    if (sigma > sigma_prev) {
      problem.t0 = sigma_prev;
      problem.t1 = sigma;
      problem.y0 = state;
      problem.step_count = std::max<std::size_t>(
          4, static_cast<std::size_t>(std::ceil((sigma - sigma_prev) * static_cast<double>(steps_per_unit_sigma))));
      state = numerics::integrate_ode(problem).final_state();
      sigma_prev = sigma;
    }
    out.times.push_back(t);
    out.mean[0].push_back(0.0);
    for (std::size_t n = 1; n <= n_units; ++n) out.mean[n].push_back(state[n - 1]);
    const double to_go = horizon - t;
    const double below = n_units == 1 ? 0.0 : state[n_units - 2];
    out.trading_rate.push_back(rate_fn(n_units, to_go) * (state[n_units - 1] - below));
  }
  return out;
}

FillRate optimal_fill_rate(const IntensityModel& model, const MarketParams& market, std::size_t n_units,
                           double delta) {
  market.validate();
  if (market.horizon.is_infinite()) throw ParameterError("execution curve: finite horizon required");
  if (const auto* p = model.as_power_law()) {
    if (!(market.r > 0.0)) throw ParameterError("execution curve: power-law books need r > 0");
    const auto coeffs = solve_power_coefficients(p->lambda, p->alpha, market.r, n_units, delta);
    std::vector<double> c_rate(n_units + 1, 0.0);
    for (std::size_t n = 1; n <= n_units; ++n) {
      const double s = power_value_and_spread(n, Horizon::infinite(), coeffs).spread;
      c_rate[n] = p->lambda / delta * std::pow(s, -p->alpha);
    }
    const double k = p->alpha * market.r;
    return [c_rate, k](std::size_t n, double to_go) { return c_rate.at(n) / -std::expm1(-k * to_go); };
  }
  if (const auto* e = model.as_exp_decay()) {
    if (market.r != 0.0) throw ParameterError("execution curve: exponential books need r = 0");
    const double z_rate = e->lambda / (delta * std::numbers::e);
    // Lambda(s*)/delta = (lambda / (delta e)) P_{n-1}(z) / P_n(z); kappa drops out.
    return [z_rate](std::size_t n, double to_go) {
      const auto lp = log_partial_sums(n, z_rate * to_go);
      return z_rate * std::exp(lp[n - 1] - lp[n]);
    };
  }
  throw ParameterError("execution curve: no closed-form optimal policy for a generic intensity");
}

ExecutionCurve optimal_execution_curve(const IntensityModel& model, const MarketParams& market, std::size_t n_units,
                                       double delta, const std::vector<double>& time_grid, double cutoff) {
  const auto fill_rate = optimal_fill_rate(model, market, n_units, delta);
  const double horizon = market.horizon.time();
  return execution_curve_ode(fill_rate, n_units, delta, horizon, time_grid, cutoff > 0.0 ? cutoff : 1e-9 * horizon);
}

}  // namespace lobliq
