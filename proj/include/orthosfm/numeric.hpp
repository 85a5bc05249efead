#pragma once

// Small numeric kernels shared by the solvers: quadratic roots with a
// clamped discriminant and a pivoted dense solve with a rank threshold.

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace orthosfm {

struct QuadraticRoots {
  std::vector<double> roots;      // ascending, 0, 1 or 2 entries
  bool clamped = false;           // tiny negative discriminant treated as zero
  bool negative_discriminant = false;
  bool degenerate = false;        // all coefficients vanish
};

/// Real roots of q2 x^2 + q1 x + q0 = 0. A discriminant in
/// (-tol * (q1^2 + |4 q2 q0|), 0) yields the double root. A vanishing
/// leading coefficient falls back to the linear root.
QuadraticRoots solve_quadratic(double q2, double q1, double q0, double tol);

/// Partially pivoted elimination. Returns nullopt when a pivot falls below
/// `rel_threshold` times the largest row norm of `a`.
std::optional<Eigen::VectorXd> solve_pivoted(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                             double rel_threshold = 1e-10);

}  // namespace orthosfm
