#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "magtube/geometry.hpp"
#include "magtube/integrator.hpp"
#include "magtube/types.hpp"

namespace magtube {

struct FlowOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  int max_steps = 200000;
  /// Radius 1 + eps of the complex time disk.
  double disk_radius = 1.25;
  /// Smallest step in |ds| before the flow is declared to have left the tube.
  double min_step = 1e-14;
  /// Transport the 2n x 2n tangent map alongside the trajectory.
  bool with_jacobian = true;
  /// Re-integrate along a random two-segment path and compare endpoints.
  bool verify_path = false;
  double path_tol = 1e-9;
  std::uint64_t path_seed = 0;
};

enum class FlowFailure { Blowup, ChartExit, StepUnderflow, MaxSteps, PathDependence };

/// Row reason codes used by the CLI: BLOWUP, CHART_EXIT or TOL.
std::string failure_code(FlowFailure f);

class FlowError : public std::runtime_error {
 public:
  FlowError(FlowFailure reason, cd reached, const std::string& what)
      : std::runtime_error(what), reason_(reason), reached_(reached) {}
  FlowFailure reason() const { return reason_; }
  /// Complex time reached before the failure.
  cd reached() const { return reached_; }
  std::string code() const { return failure_code(reason_); }

 private:
  FlowFailure reason_;
  cd reached_;
};

struct FlowState {
  PhasePoint z;
  /// Tangent map of the flow, identity at time 0 (empty when not transported).
  CMat jac;
  /// Integral of A_j dx^j along the projected trajectory.
  cd quad{0.0};
  cd time{0.0};
};

/// X_E(z): xdot^l = g^{lj} p_j, pdot_l = -1/2 d_l g^{jk} p_j p_k + beta_{lj} g^{jk} p_k.
CVec hamiltonian_field(const ChartedGeometry& geo, const PhasePoint& z);

/// DX_E(z), the 2n x 2n derivative of the field in (x, p) coordinates.
CMat hamiltonian_jacobian(const ChartedGeometry& geo, const PhasePoint& z);

/// Real time flow. Throws FlowError(ChartExit) if the trajectory leaves the chart box.
FlowState flow_real(const ChartedGeometry& geo, const PhasePoint& z0, double sigma,
                    const FlowOptions& opts = {});

/// Flow of a real starting point along a complex time path inside the disk.
FlowState flow_complex(const ChartedGeometry& geo, const PhasePoint& z0, const ComplexTime& t,
                       const FlowOptions& opts = {});

/// Flow of an arbitrary (possibly complex) starting point along a path, with no
/// realness or disk precondition. Used for inverse flows from complex endpoints.
FlowState flow_along(const ChartedGeometry& geo, const PhasePoint& z0, const ComplexTime& t,
                     const FlowOptions& opts = {});

/// The path that retraces `t` from its target back to 0, expressed as times
/// relative to the target.
ComplexTime reversed_path(const ComplexTime& t);

/// Two-segment path to the same target through a seeded random corner inside the disk.
ComplexTime random_two_segment_path(cd target, double disk_radius, std::uint64_t seed);

struct RadiusEstimate {
  double radius = 0.0;
  /// Set when dist >= A, where the bound gives no time at all.
  bool degenerate = false;
};

/// (1/C) log(A / dist), the guaranteed time radius of the continued flow.
RadiusEstimate radius_estimate(double C, double A, double dist);

/// Column names of a FlowState CSV row: Re/Im of x, p, q, then jac row-major.
std::vector<std::string> flow_csv_header(int n);
std::vector<double> flow_csv_row(const FlowState& s, int n);

}  // namespace magtube
