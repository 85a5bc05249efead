#pragma once

// Closed-form recovery of squared body lengths from orthographic frames.
//
// Every solver works on the sign-free quartic relation that holds, for each
// frame i, between the true squared lengths (a², b², c²) of a triangle and
// its projected squared lengths (a_i², b_i², c_i²):
//
//   F(a²,b²,c²) + F(a_i²,b_i²,c_i²)
//     + 2(-a_i²+b_i²+c_i²) a² + 2(a_i²-b_i²+c_i²) b² + 2(a_i²+b_i²-c_i²) c² = 0
//
// with F(x,y,z) = x²+y²+z²-2xy-2xz-2yz. F of the unknowns cancels when two
// frames are subtracted, which is what makes the linear variants possible.

#include <span>
#include <vector>

#include "orthosfm/geometry.hpp"

namespace orthosfm {

/// Per-frame coefficients of the quartic relation.
struct QuadCoeffs3 {
  double coef_a = 0.0;    // 2(-a_i² + b_i² + c_i²)
  double coef_b = 0.0;    // 2( a_i² - b_i² + c_i²)
  double coef_c = 0.0;    // 2( a_i² + b_i² - c_i²)
  double constant = 0.0;  // F(a_i², b_i², c_i²)
};

QuadCoeffs3 quad_coeffs(const TriangleDistances& frame_sq);

/// F(x, y, z); equals -16 * area² for a triangle with squared sides x, y, z.
double heron_form(double x, double y, double z);

/// Left side of the quartic relation (units: length⁴).
double eq1_residual(const TriangleDistances& lengths, const TriangleDistances& frame_sq);

/// Two frame-difference rows and the elimination a² = A_c c² + A_Cst,
/// b² = B_c c² + B_Cst they induce.
struct LinearizedPair {
  double d_a1 = 0, d_b1 = 0, d_c1 = 0, d_cst1 = 0;
  double d_a2 = 0, d_b2 = 0, d_c2 = 0, d_cst2 = 0;
  double a_c = 0, a_cst = 0, b_c = 0, b_cst = 0;
  double denominator = 0;  // d_a1 d_b2 - d_a2 d_b1

  double a_sq(double c_sq) const { return a_c * c_sq + a_cst; }
  double b_sq(double c_sq) const { return b_c * c_sq + b_cst; }
};

/// Differences frame1 - pivot and frame2 - pivot. Throws kDegenerate when
/// the 2x2 denominator vanishes relative to the observation scale.
LinearizedPair linearize(const TriangleDistances& frame1, const TriangleDistances& frame2,
                         const TriangleDistances& pivot, double tol = kDefaultTolerance);

template <class Distances>
struct Candidate {
  Distances lengths;
  bool feasible = false;
  /// Per-frame quartic residual divided by scale², where scale is the
  /// largest squared length among the candidate and the observations. For
  /// tetrahedra each entry is the worst of the four faces.
  std::vector<double> residuals;

  double max_residual() const;
};

template <class Distances>
struct RecoveryResult {
  std::vector<Candidate<Distances>> candidates;  // ascending by max_residual()
  bool measurement_inconsistent = false;          // no real root

  std::size_t feasible_count() const;
};

using TriangleRecovery = RecoveryResult<TriangleDistances>;
using TetraRecovery = RecoveryResult<TetraDistances>;

/// Three points, three frames: one quadratic in c², 0..2 candidates.
TriangleRecovery solve_p3f3(std::span<const TriangleDistances> frames,
                            double tol = kDefaultTolerance);

/// Three points, four frames: 3x3 linear system, at most one candidate.
TriangleRecovery solve_p3f4(std::span<const TriangleDistances> frames,
                            double tol = kDefaultTolerance);

/// Four points, three frames: 6x6 linear system over the three faces that
/// contain T, at most one candidate.
TetraRecovery solve_p4f3(std::span<const TetraDistances> frames, double tol = kDefaultTolerance);

/// Non-negative and no shorter than any projection, both within tol * scale
/// where scale is the largest observed squared length.
bool feasibility_check(const TriangleDistances& candidate,
                       std::span<const TriangleDistances> frames,
                       double tol = kDefaultTolerance);
bool feasibility_check(const TetraDistances& candidate, std::span<const TetraDistances> frames,
                       double tol = kDefaultTolerance);

}  // namespace orthosfm
