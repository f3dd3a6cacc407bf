#pragma once

#include <complex>
#include <utility>

#include "mdkit/types.hpp"

namespace mdkit {

/// Solves (J^T J + lambda I) s = J^T r. For well-conditioned J this is J^-1 r up to
/// O(lambda / sigma_min^2); for J = 0 it returns zero. Entries are scaled by max|J|
/// before forming the normal equations.
[[nodiscard]] inline State regularized_solve(const Mat2& j, State r, double lambda) {
  const double scale = j.max_abs();
  if (scale == 0.0 || !std::isfinite(scale)) return {0.0, 0.0};
  const Mat2 a{j.m11 / scale, j.m12 / scale, j.m21 / scale, j.m22 / scale};
  const State b{r.x / scale, r.y / scale};
  const double mu = lambda / (scale * scale);
  const double n11 = a.m11 * a.m11 + a.m21 * a.m21 + mu;
  const double n12 = a.m11 * a.m12 + a.m21 * a.m22;
  const double n22 = a.m12 * a.m12 + a.m22 * a.m22 + mu;
  const double rhs1 = a.m11 * b.x + a.m21 * b.y;
  const double rhs2 = a.m12 * b.x + a.m22 * b.y;
  // det(A^T A) = det(A)^2 exactly; avoids cancellation in n11 n22 - n12^2.
  const double det_a = a.det();
  const double det = det_a * det_a + mu * (n11 + n22 - 2.0 * mu) + mu * mu;
  if (det == 0.0) return {0.0, 0.0};
  return {(n22 * rhs1 - n12 * rhs2) / det, (n11 * rhs2 - n12 * rhs1) / det};
}

/// Eigenvalues of a real 2x2 matrix.
[[nodiscard]] inline std::pair<std::complex<double>, std::complex<double>> eigenvalues(const Mat2& m) {
  const double half_tr = 0.5 * m.trace();
  const double disc = half_tr * half_tr - m.det();
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return {{half_tr + s, 0.0}, {half_tr - s, 0.0}};
  }
  const double s = std::sqrt(-disc);
  return {{half_tr, s}, {half_tr, -s}};
}

}  // namespace mdkit
