#pragma once

#include <functional>
#include <stdexcept>

#include "magtube/types.hpp"

namespace magtube {

/// Thrown by a right-hand side evaluated outside the region where it is defined.
/// The integrator treats it as a rejected step and retries with a smaller one.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegratorOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  int max_steps = 200000;
  /// Smallest admissible step, in units of the independent variable.
  double min_step = 1e-14;
  /// 0 selects an automatic initial step.
  double initial_step = 0.0;
};

enum class IntegrationStatus { Ok, StepUnderflow, MaxSteps, LeftDomain };

struct IntegrationResult {
  IntegrationStatus status = IntegrationStatus::Ok;
  int accepted = 0;
  int rejected = 0;
  /// Independent variable reached (equals t_end on success).
  double t = 0.0;
};

/// dy/dt = f(t, y) on complex state with real t.
using ComplexRhs = std::function<void(double t, const CVec& y, CVec& dydt)>;
/// Called after each accepted step; returning false stops with LeftDomain.
using StepGuard = std::function<bool(double t, const CVec& y)>;

/// Dormand-Prince 8(5,3) with Hairer's error estimate and step control, integrating
/// y from t = 0 to t_end (> 0) in place. Modulus is used for all error scaling.
IntegrationResult integrate_dop853(const ComplexRhs& f, CVec& y, double t_end,
                                   const IntegratorOptions& opts, const StepGuard& guard = {});

}  // namespace magtube
