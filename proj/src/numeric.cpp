#include "orthosfm/numeric.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace orthosfm {

QuadraticRoots solve_quadratic(double q2, double q1, double q0, double tol) {
  QuadraticRoots out;
  const double mag = std::max({std::abs(q2), std::abs(q1), std::abs(q0)});
  if (mag == 0.0 || !std::isfinite(mag)) {
    out.degenerate = true;
    return out;
  }
  if (std::abs(q2) <= 1e-14 * mag) {
    if (std::abs(q1) <= 1e-14 * mag) {
      // q0 != 0 with no x dependence: inconsistent.
      out.negative_discriminant = true;
      return out;
    }
    out.roots.push_back(-q0 / q1);
    return out;
  }
  double disc = q1 * q1 - 4.0 * q2 * q0;
  if (disc < 0.0) {
    if (disc > -tol * (q1 * q1 + std::abs(4.0 * q2 * q0))) {
      disc = 0.0;
      out.clamped = true;
    } else {
      out.negative_discriminant = true;
      return out;
    }
  }
  if (disc == 0.0) {
    out.roots.push_back(-q1 / (2.0 * q2));
    return out;
  }
  // Cancellation-free pair.
  const double s = std::sqrt(disc);
  const double q = -0.5 * (q1 + std::copysign(s, q1));
  double r1 = q / q2;
  double r2 = q != 0.0 ? q0 / q : -r1;
  if (r1 > r2) std::swap(r1, r2);
  out.roots = {r1, r2};
  return out;
}

std::optional<Eigen::VectorXd> solve_pivoted(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                             double rel_threshold) {
  const double row_norm = a.rowwise().norm().maxCoeff();
  if (!(row_norm > 0.0) || !std::isfinite(row_norm)) return std::nullopt;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > rel_threshold * row_norm)) return std::nullopt;
  Eigen::VectorXd x = lu.solve(b);
  if (!x.allFinite()) return std::nullopt;
  return x;
}

}  // namespace orthosfm
