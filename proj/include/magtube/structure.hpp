#pragma once

#include <vector>

#include "magtube/flow.hpp"
#include "magtube/geometry.hpp"
#include "magtube/types.hpp"

namespace magtube {

struct FrameOptions {
  FlowOptions flow;
  /// Gram-Schmidt the transported columns. Spans are unchanged.
  bool orthonormalize = true;
};

/// Columns of F span P_z(t), the push forward of the vertical space at Phi_{-t}(z).
struct LagrangianFrame {
  PhasePoint base;
  cd time{0.0};
  CMat F;
};

LagrangianFrame frame_at(const ChartedGeometry& geo, const PhasePoint& z, const ComplexTime& t,
                         const FrameOptions& opts = {});

/// max |F^T Omega(z) F|, zero for a Lagrangian frame.
double lagrangian_residual(const ChartedGeometry& geo, const LagrangianFrame& frame);

/// Smallest singular value of [Q, conj(Q)] with Q an orthonormal basis of span F.
double transversality_check(const LagrangianFrame& frame);

/// H_ab = -i omega(F_a, conj(F_b)), Hermitian for Lagrangian F.
CMat positivity_form(const ChartedGeometry& geo, const PhasePoint& base, const CMat& F);

struct ACSPointData {
  PhasePoint base;
  cd time{0.0};
  RMat J;
  /// Eigenvalues of the positivity form on an orthonormal frame, ascending.
  RVec positivity_spectrum;
  /// Largest imaginary part discarded when taking J real.
  double imag_residual = 0.0;
  double transversality = 0.0;
};

/// Thrown by assemble_J when [F, conj F] is too close to singular.
struct IllConditionedFrame : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// J = Re(S diag(iI, -iI) S^{-1}) with S = [F, conj F].
ACSPointData assemble_J(const ChartedGeometry& geo, const LagrangianFrame& frame,
                        double transversality_tol = 1e-6);

struct CompatibilityResidual {
  double square = 0.0;     // |J^2 + I|
  double symplectic = 0.0; // |J^T Omega J - Omega|
  /// Smallest eigenvalue of the symmetric part of Omega J, i.e. min omega(X, JX) on unit X.
  double metric_min = 0.0;
};
CompatibilityResidual compatibility(const ChartedGeometry& geo, const ACSPointData& acs);

/// Largest component of the brackets [F_a, F_b] outside span F(z), with the frame
/// fields differentiated by central differences of step h in the real coordinates.
double integrability_residual(const ChartedGeometry& geo, const PhasePoint& z,
                              const ComplexTime& t, double h = 1e-4,
                              const FrameOptions& opts = {});

/// One CSV row per point: base coordinates, transversality, min positivity
/// eigenvalue, integrability residual, J row-major.
struct ACSRow {
  PhasePoint base;
  bool ok = false;
  std::string code;
  double transversality = 0.0;
  double min_positivity = 0.0;
  double integrability = 0.0;
  RMat J;
};

std::vector<ACSRow> acs_batch(const ChartedGeometry& geo, const std::vector<PhasePoint>& points,
                              const ComplexTime& t, int jobs = 1, double h = 1e-4,
                              const FrameOptions& opts = {});

}  // namespace magtube
