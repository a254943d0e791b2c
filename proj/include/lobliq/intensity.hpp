#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>

namespace lobliq {

/// Lambda(s) = lambda * s^-alpha. Requires alpha > 1; unbounded at s = 0.
struct PowerLaw {
  double lambda = 1.0;
  double alpha = 2.0;
};

/// Lambda(s) = lambda * exp(-kappa s); lambda is the fill rate at the bid.
struct ExpDecay {
  double lambda = 1.0;
  double kappa = 1.0;
};

/// User-supplied C^2 depth function on [s_min, inf). Derivatives are mandatory.
struct GenericIntensity {
  std::function<double(double)> value;
  std::function<double(double)> first_derivative;
  std::function<double(double)> second_derivative;
  double s_min = 0.0;
};

/// Fill intensity as a function of the posted spread. Immutable after construction.
class IntensityModel {
 public:
  using Variant = std::variant<PowerLaw, ExpDecay, GenericIntensity>;

  static IntensityModel power_law(double lambda, double alpha);
  static IntensityModel exp_decay(double lambda, double kappa);
  static IntensityModel generic(GenericIntensity fn);

  const Variant& variant() const { return model_; }
  const PowerLaw* as_power_law() const { return std::get_if<PowerLaw>(&model_); }
  const ExpDecay* as_exp_decay() const { return std::get_if<ExpDecay>(&model_); }
  const GenericIntensity* as_generic() const { return std::get_if<GenericIntensity>(&model_); }

  double support_min() const;
  std::string describe() const;

 private:
  explicit IntensityModel(Variant v) : model_(std::move(v)) {}
  Variant model_;
};

/// Lambda(s). Power law at s = 0 returns +infinity (check with std::isinf);
/// spreads below the support throw std::domain_error.
double rate(const IntensityModel& model, double s);

struct RateDerivatives {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

RateDerivatives derivatives(const IntensityModel& model, double s);

struct ConcavityCheck {
  bool holds = true;
  double worst_ratio = 0.0;   // max of Lambda Lambda'' / Lambda'^2 over the grid
  double worst_spread = 0.0;  // where it was attained
};

/// Tests Lambda decreasing and Lambda Lambda'' / (Lambda')^2 < 2 on the grid.
/// This is the sufficient condition for monotone optimal spreads and concave values.
ConcavityCheck concavity_condition_holds(const IntensityModel& model, std::span<const double> s_grid);

/// Remaining time to maturity; Infinite means the stationary problem.
class Horizon {
 public:
  static Horizon finite(double time_to_maturity);
  static Horizon infinite() { return Horizon(); }

  bool is_infinite() const { return !time_.has_value(); }
  double time() const;  // throws for the infinite horizon

 private:
  Horizon() = default;
  std::optional<double> time_;
};

struct MarketParams {
  double r = 0.0;
  Horizon horizon = Horizon::infinite();

  /// Throws ParameterError unless r >= 0 and (finite horizon or r > 0).
  void validate() const;
};

/// (1 - e^{-r alpha T})^{1/alpha}: the time factor shared by every
/// power-law value and spread. Equals 1 on the infinite horizon.
double power_time_factor(double r, double alpha, const Horizon& horizon);

/// A_alpha = (alpha-1)^(alpha-1) / alpha^alpha, the value of sup_s (s - m) s^-alpha at m = 1.
double power_constant(double alpha);

}  // namespace lobliq
