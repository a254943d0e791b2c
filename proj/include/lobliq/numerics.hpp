#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lobliq/errors.hpp"

namespace lobliq::numerics {

inline constexpr double kDefaultRootTolerance = 1e-12;

/// Closed interval known to contain a sign change of the target function.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  double tolerance = kDefaultRootTolerance;  // absolute, on the root
};

// Thrown by solve_monotone_root when f(lo) and f(hi) share a sign.
class NoSignChange : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Principal branch of the Lambert W function, W(y) e^{W(y)} = y for y >= -1/e.
/// Halley iteration from a branch-aware starting guess.
double lambert_w0(double y);

/// W(e^L) without forming e^L, usable for arguments far beyond DBL_MAX.
double lambert_w0_of_exp(double log_y);

/// Logarithmic integral li(y) = int_0^y dt / log t on [0, 1).
///
/// With t = exp(-U e^w), U = -log y, the integral becomes
/// -int_0^inf exp(-U e^w) dw, which is smooth and decays double
/// exponentially; it is evaluated by adaptive Gauss-Kronrod quadrature.
double log_integral(double y);

/// li(e^L) for L < 0, keeping full precision as y = e^L approaches 1.
double log_integral_of_exp(double log_y);

/// Safeguarded root finder (inverse-quadratic / secant steps with bisection
/// fallback). Never leaves the initial bracket.
double solve_monotone_root(const std::function<double(double)>& f, const Bracket& bracket);

/// Adaptive Gauss-Kronrod quadrature on [a, b]; b may be +infinity.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-13);

using VectorField =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeProblem {
  std::size_t dimension = 0;
  VectorField right_hand_side;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<double> y0;
  std::size_t step_count = 1;
};

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;

  const std::vector<double>& final_state() const { return states.back(); }
};

/// Fixed-step classical fourth-order Runge-Kutta. Returns step_count + 1 points.
OdeTrajectory integrate_ode(const OdeProblem& problem);

}  // namespace lobliq::numerics
