#include "lobliq/intensity.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lobliq/errors.hpp"

namespace lobliq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void outside_support(double s, double s_min) {
  std::ostringstream msg;
  msg << "spread " << s << " outside intensity support [" << s_min << ", inf)";
  throw std::domain_error(msg.str());
}

}  // namespace

IntensityModel IntensityModel::power_law(double lambda, double alpha) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("power law: lambda must be > 0");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw ParameterError("power law: alpha must be > 1 (no optimal spread exists for alpha <= 1)");
  }
  return IntensityModel(PowerLaw{lambda, alpha});
}

IntensityModel IntensityModel::exp_decay(double lambda, double kappa) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("exponential book: lambda must be > 0");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("exponential book: kappa must be > 0");
  return IntensityModel(ExpDecay{lambda, kappa});
}

IntensityModel IntensityModel::generic(GenericIntensity fn) {
  if (!fn.value || !fn.first_derivative || !fn.second_derivative) {
    throw ParameterError("generic intensity: value and both derivatives are required");
  }
  if (!(fn.s_min >= 0.0)) throw ParameterError("generic intensity: s_min must be >= 0");
  return IntensityModel(std::move(fn));
}

double IntensityModel::support_min() const {
  if (const auto* g = as_generic()) return g->s_min;
  return 0.0;
}

std::string IntensityModel::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const PowerLaw& p) { out << "power_law(lambda=" << p.lambda << ", alpha=" << p.alpha << ")"; },
                 [&](const ExpDecay& e) { out << "exp_decay(lambda=" << e.lambda << ", kappa=" << e.kappa << ")"; },
                 [&](const GenericIntensity& g) { out << "generic(s_min=" << g.s_min << ")"; },
             },
             model_);
  return out.str();
}

double rate(const IntensityModel& model, double s) {
  if (std::isnan(s) || s < model.support_min()) outside_support(s, model.support_min());
  return std::visit(Overloaded{
                        [s](const PowerLaw& p) {
                          if (s == 0.0) return std::numeric_limits<double>::infinity();
                          return p.lambda * std::pow(s, -p.alpha);
                        },
                        [s](const ExpDecay& e) { return e.lambda * std::exp(-e.kappa * s); },
                        [s](const GenericIntensity& g) { return g.value(s); },
                    },
                    model.variant());
}

RateDerivatives derivatives(const IntensityModel& model, double s) {
  if (std::isnan(s) || s < model.support_min()) outside_support(s, model.support_min());
  return std::visit(Overloaded{
                        [s](const PowerLaw& p) {
                          if (s == 0.0) throw std::domain_error("power law derivatives undefined at s = 0");
                          const double v = p.lambda * std::pow(s, -p.alpha);
                          return RateDerivatives{v, -p.alpha * v / s, p.alpha * (p.alpha + 1.0) * v / (s * s)};
                        },
                        [s](const ExpDecay& e) {
                          const double v = e.lambda * std::exp(-e.kappa * s);
                          return RateDerivatives{v, -e.kappa * v, e.kappa * e.kappa * v};
                        },
                        [s](const GenericIntensity& g) {
                          return RateDerivatives{g.value(s), g.first_derivative(s), g.second_derivative(s)};
                        },
                    },
                    model.variant());
}

ConcavityCheck concavity_condition_holds(const IntensityModel& model, std::span<const double> s_grid) {
  ConcavityCheck check;
  check.worst_ratio = -std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    const auto d = derivatives(model, s);
    if (!(d.first < 0.0)) {
      check.holds = false;
      check.worst_ratio = std::numeric_limits<double>::infinity();
      check.worst_spread = s;
      return check;
    }
    const double ratio = d.value * d.second / (d.first * d.first);
    if (ratio > check.worst_ratio) {
      check.worst_ratio = ratio;
      check.worst_spread = s;
    }
    if (!(ratio < 2.0)) check.holds = false;
  }
  return check;
}

Horizon Horizon::finite(double time_to_maturity) {
  if (!(time_to_maturity >= 0.0) || !std::isfinite(time_to_maturity)) {
    throw ParameterError("horizon: time to maturity must be finite and >= 0");
  }
  Horizon h;
  h.time_ = time_to_maturity;
  return h;
}

double Horizon::time() const {
  if (!time_) throw std::logic_error("Horizon::time() called on the infinite horizon");
  return *time_;
}

void MarketParams::validate() const {
  if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError("market: discount rate r must be >= 0");
  if (horizon.is_infinite() && !(r > 0.0)) {
    throw ParameterError("market: the infinite horizon requires r > 0");
  }
}

double power_time_factor(double r, double alpha, const Horizon& horizon) {
  if (horizon.is_infinite()) return 1.0;
  if (!(r > 0.0)) throw ParameterError("power_time_factor: r must be > 0 (use the zero-rate solver)");
  return std::pow(-std::expm1(-r * alpha * horizon.time()), 1.0 / alpha);
}

double power_constant(double alpha) {
  return std::pow(alpha - 1.0, alpha - 1.0) / std::pow(alpha, alpha);
}

}  // namespace lobliq
