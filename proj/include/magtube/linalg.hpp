#pragma once

#include "magtube/types.hpp"

namespace magtube::linalg {

/// Below this modulus the removable-singularity functions switch to their series.
inline constexpr double kSeriesSwitch = 1e-3;

// Entire functions of w written without square roots, so they are single valued
// for complex arguments and regular at w = 0.

/// sinh(sqrt(w)) / sqrt(w)
cd sinhc_sqrt(cd w);
/// (cosh(sqrt(w)) - 1) / w
cd coshm1_over_sq(cd w);
/// sin(x) / x
cd sinc(cd x);
/// (1 - cos(x)) / x
cd one_minus_cos_over(cd x);

/// Matrix exponential.
CMat expm(const CMat& a);

/// (exp(X) - 1) / X := sum_k X^k / (k+1)!, well defined for singular X.
CMat phi1(const CMat& a);

/// Orthonormal basis (Hermitian inner product) of the column span, same column count.
/// Modified Gram-Schmidt with one reorthogonalization pass.
CMat orthonormalize_columns(const CMat& f);

double smallest_singular_value(const CMat& a);

/// Sine of the largest principal angle between the column spans of `a` and `b`.
/// Computed as the norm of the part of span(b) outside span(a), which stays
/// accurate for nearly coincident subspaces.
double subspace_distance(const CMat& a, const CMat& b);

/// Norm of the component of `v` orthogonal to the column span of orthonormal `q`.
double residual_outside(const CMat& q, const CVec& v);

}  // namespace magtube::linalg
