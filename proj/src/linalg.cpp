#include "magtube/linalg.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace magtube::linalg {

cd sinhc_sqrt(cd w) {
  if (std::abs(w) < kSeriesSwitch) {
    // 1 + w/6 + w^2/120 + w^3/5040
    return 1.0 + w / 6.0 + w * w / 120.0 + w * w * w / 5040.0;
  }
  const cd s = std::sqrt(w);
  return std::sinh(s) / s;
}

cd coshm1_over_sq(cd w) {
  if (std::abs(w) < kSeriesSwitch) {
    return 0.5 + w / 24.0 + w * w / 720.0 + w * w * w / 40320.0;
  }
  const cd s = std::sqrt(w);
  return (std::cosh(s) - 1.0) / w;
}

cd sinc(cd x) {
  if (std::abs(x) < kSeriesSwitch) {
    const cd x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

cd one_minus_cos_over(cd x) {
  if (std::abs(x) < kSeriesSwitch) {
    const cd x2 = x * x;
    return x / 2.0 - x * x2 / 24.0 + x * x2 * x2 / 720.0;
  }
  return (1.0 - std::cos(x)) / x;
}

CMat expm(const CMat& a) { return a.exp(); }

CMat phi1(const CMat& a) {
  const Eigen::Index n = a.rows();
  if (a.cwiseAbs().maxCoeff() * static_cast<double>(n) < kSeriesSwitch) {
    CMat sum = CMat::Identity(n, n);
    CMat term = CMat::Identity(n, n);
    for (int k = 1; k <= 6; ++k) {
      term = term * a / static_cast<double>(k + 1);
      sum += term;
    }
    return sum;
  }
  // Top-right block of exp([[X, I], [0, 0]]).
  CMat aug = CMat::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, n) = CMat::Identity(n, n);
  const CMat e = aug.exp();
  return e.topRightCorner(n, n);
}

CMat orthonormalize_columns(const CMat& f) {
  CMat q = f;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < j; ++k) {
        const cd proj = q.col(k).dot(q.col(j));  // conjugates the left operand
        q.col(j) -= proj * q.col(k);
      }
    }
    const double nrm = q.col(j).norm();
    if (nrm == 0.0) throw std::runtime_error("orthonormalize_columns: rank deficient frame");
    q.col(j) /= nrm;
  }
  return q;
}

double smallest_singular_value(const CMat& a) {
  Eigen::JacobiSVD<CMat> svd(a);
  return svd.singularValues().minCoeff();
}

double subspace_distance(const CMat& a, const CMat& b) {
  const CMat qa = orthonormalize_columns(a);
  const CMat qb = orthonormalize_columns(b);
  const CMat outside = qb - qa * (qa.adjoint() * qb);
  Eigen::JacobiSVD<CMat> svd(outside);
  return svd.singularValues().maxCoeff();
}

double residual_outside(const CMat& q, const CVec& v) {
  return (v - q * (q.adjoint() * v)).norm();
}

}  // namespace magtube::linalg
