#pragma once

#include "magtube/flow.hpp"
#include "magtube/geometry.hpp"
#include "magtube/structure.hpp"

namespace magtube {

/// nu_* = diag(I, -I) on the stacked (x, p) tangent space.
CMat fiber_inversion_pushforward(int n);

/// max |nu(Phi^{-beta}_sigma(nu z)) - Phi^{beta}_{-sigma}(z)| with both sides
/// integrated numerically; the -beta geometry is derived from geo_plus.
double check_flow_reversal(const GeometryPtr& geo_plus, const PhasePoint& z, double sigma,
                           const FlowOptions& opts = {});

/// The same identity with both sides taken from the closed-form flow on R^2.
double check_flow_reversal_flat(double B, double mass_freq, const PhasePoint& z, double sigma);

/// Distance between nu_* P^{beta}_z(t) and conj P^{-beta}_{nu z}(t). For t = i
/// this is the antiholomorphic intertwining of the two structures.
double check_frame_intertwine(const GeometryPtr& geo_plus, const PhasePoint& z,
                              const ComplexTime& t = ComplexTime(kI),
                              const FrameOptions& opts = {});

/// For t = sigma + i tau: distance between D Phi^{-beta}_{2 sigma} nu_* P^{beta}_z(t)
/// and conj P^{-beta}_{w}(t), w = Phi^{-beta}_{2 sigma}(nu z).
double check_shifted_intertwine(const GeometryPtr& geo_plus, const PhasePoint& z,
                                const ComplexTime& t, const FrameOptions& opts = {});

struct IntertwineReport {
  PhasePoint base;
  double flow_residual = 0.0;
  double subspace_distance = 0.0;
};

IntertwineReport intertwine_report(const GeometryPtr& geo_plus, const PhasePoint& z, double sigma,
                                   const FrameOptions& opts = {});

}  // namespace magtube
