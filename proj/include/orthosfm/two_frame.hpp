#pragma once

// What two orthographic frames can and cannot tell about a rigid point body.
//
// Structure is not recoverable: a one-parameter family of bodies reprojects
// onto both frames (ambiguity_family). What remains is a consistency test.
// Three corresponded points fix, for any further point, the line its second
// image must lie on; the distance to that line scores a correspondence
// hypothesis (match_points) or a rigidity hypothesis (rigidity_score).

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "orthosfm/geometry.hpp"

namespace orthosfm {

/// Coefficients of  f_b2 b⁴ + (f_cb c² + f_b) b² + (f_c c² + f_c2 c⁴ + f_cst) = 0,
/// the relation between b² and c² left after eliminating a² from the two
/// frames' quartic relations.
struct BofCCoeffs {
  double f_cb = 0.0;
  double f_c = 0.0;
  double f_b = 0.0;
  double f_cst = 0.0;
  double f_b2 = 0.0;
  double f_c2 = 0.0;

  // a² = a_per_b * b² + a_per_c * c² + a_cst (the eliminated variable).
  double a_per_b = 0.0;
  double a_per_c = 0.0;
  double a_cst = 0.0;

  double evaluate(double b_sq, double c_sq) const;
  double discriminant(double c_sq) const;
  double a_sq(double b_sq, double c_sq) const { return a_per_b * b_sq + a_per_c * c_sq + a_cst; }
};

/// Throws kDegenerate when the a²-coefficients of the two frames coincide.
BofCCoeffs b_of_c_coeffs(const TriangleDistances& frame1, const TriangleDistances& frame2,
                         double tol = kDefaultTolerance);

/// Non-negative b² roots for a given c², ascending. Empty means no solution
/// at this c² (negative discriminant or only negative roots); pick another c.
std::vector<double> solve_b_given_c(const BofCCoeffs& coeffs, double c_sq,
                                    double tol = kDefaultTolerance);

struct Line2 {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  Eigen::Vector2d direction = Eigen::Vector2d::Zero();
  bool degenerate = false;  // direction vanished; distance falls back to |p - origin|

  double distance(const Eigen::Vector2d& p) const;
};

/// A reconstruction of triangle P, Q, R in both frames for given squared
/// lengths, with R placed at depth 0 and P in front of R in each frame.
/// Maps frame-1 viewing rays to frame-2 lines.
class TriangleTransfer {
 public:
  /// Returns nullopt when a length is shorter than its projection in either
  /// frame or the depths cannot close the triangle. Throws kDegenerate when
  /// P, Q, R are collinear in 3D.
  static std::optional<TriangleTransfer> build(const std::array<Eigen::Vector2d, 3>& frame1,
                                               const std::array<Eigen::Vector2d, 3>& frame2,
                                               double a_sq, double b_sq, double c_sq,
                                               double tol = kDefaultTolerance);

  /// Image in frame 2 of the viewing ray through `x1` in frame 1: the line
  /// through the images of the ray's hits with plane RPQ and with that
  /// plane shifted one unit along RP x RQ. Throws kDegenerate when the ray
  /// runs parallel to the plane.
  Line2 transfer_ray(const Eigen::Vector2d& x1) const;

  /// Rotation taking frame-1 body coordinates to frame-2 body coordinates.
  Eigen::Matrix3d rotation() const { return basis2_ * basis1_inv_; }

  /// Depths of P and Q relative to R in each frame.
  const std::array<Eigen::Vector3d, 2>& rp1_rq1() const { return frame1_edges_; }
  const Eigen::Vector2d& r1() const { return r1_; }
  const Eigen::Vector2d& r2() const { return r2_; }

 private:
  TriangleTransfer() = default;

  Eigen::Vector2d r1_, r2_;
  std::array<Eigen::Vector3d, 2> frame1_edges_;
  Eigen::Matrix3d basis1_inv_;  // inverse of [RP1 RQ1 RP1xRQ1]
  Eigen::Matrix3d basis2_;      // [RP2 RQ2 RP2xRQ2]
  double normal_norm_ = 1.0;
};

/// Frame-1 index -> frame-2 index for the four probe points P, Q, R, T.
struct Assignment {
  std::array<std::size_t, 4> targets{0, 1, 2, 3};
  friend bool operator==(const Assignment&, const Assignment&) = default;
  friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

struct FourPointResidual {
  double residual = std::numeric_limits<double>::infinity();  // length units
  std::size_t branch = 0;  // index into the b² roots
  double a_sq = 0.0;
  double b_sq = 0.0;
  double c_sq = 0.0;
};

/// Distance of T2 to the line predicted from P, Q, R at the given c², the
/// lower of the two b branches. `frame1` lists P, Q, R, T in that order;
/// `frame2` is indexed through `assignment`. nullopt when no b branch is
/// admissible at this c². Throws kDegenerate for collinear P, Q, R or when
/// the elimination breaks down.
std::optional<FourPointResidual> collinearity_residual_4pt(const FrameObservation& frame1,
                                                           const FrameObservation& frame2,
                                                           const Assignment& assignment,
                                                           double c_sq,
                                                           double tol = kDefaultTolerance);

using Quad2 = std::array<Eigen::Vector2d, 4>;

/// Kernel on raw coordinates (P, Q, R, T in both frames, already paired).
std::optional<FourPointResidual> collinearity_residual(const Quad2& frame1, const Quad2& frame2,
                                                       double c_sq, double tol);

struct FourPointFit {
  FourPointResidual score;
  std::array<std::size_t, 3> triangle{0, 1, 2};  // which probes played P, Q, R
  std::optional<TriangleTransfer> transfer;
};

/// Starting c² and upward scan used when c² is not given: c² = 1.5² times
/// the longest projection of c, then c grows by 1.25 per step, at most 40
/// steps. P, Q, R are relabeled cyclically to keep the elimination well
/// conditioned; the predicted line does not depend on that labeling.
inline constexpr double kInitialCFactor = 1.5;
inline constexpr double kCScanFactor = 1.25;
inline constexpr int kCScanSteps = 40;

std::optional<FourPointFit> fit_four_points(const Quad2& frame1, const Quad2& frame2, double tol);

/// 4-point consistency with known correspondence: collinearity residual of
/// the identity assignment on the first four labels of `frame1`. Returns
/// +infinity when no c² admits a solution.
double rigidity_score(const FrameObservation& frame1, const FrameObservation& frame2,
                      double tol = kDefaultTolerance);

struct FivePointResidual {
  double residual = 0.0;        // length units
  bool line_degenerate = false;  // S2_a and S2_b coincide
};

/// Linear test on P, Q, R, T, S (frame-1 order): S's viewing ray meets
/// plane PQT at S_a and plane RPQ at S_b; their affine coordinates carry over
/// to frame 2 and the line through their images must contain S2. Throws
/// kDegenerate when T1P1 || T1Q1 or R1P1 || R1Q1.
FivePointResidual residual_5pt(const FrameObservation& frame1, const FrameObservation& frame2,
                               double tol = kDefaultTolerance);

struct ScoredAssignment {
  Assignment assignment;
  double residual = std::numeric_limits<double>::infinity();
};

struct MatchOptions {
  double threshold = 1e-6;  // rigidity threshold, relative to the observation diameter
  double tol = kDefaultTolerance;
};

struct MatchReport {
  std::array<std::size_t, 4> probes{};     // frame-1 indices acting as P, Q, R, T
  std::vector<ScoredAssignment> ranking;   // every ordered assignment, best first
  std::vector<std::size_t> bijection;      // frame-1 index -> frame-2 index
  std::vector<double> point_residuals;     // per frame-1 point, length units
  double best_residual = std::numeric_limits<double>::infinity();
  double margin = std::numeric_limits<double>::infinity();  // runner-up minus best
  double threshold = 0.0;                  // absolute, length units
  bool consistent = false;

  std::size_t assignments_scored() const { return ranking.size(); }
};

/// Correspondence search between two unlabeled frames of one rigid body.
/// Scores all n(n-1)(n-2)(n-3) ordered probe assignments in parallel, then
/// assigns the remaining points greedily by line distance.
MatchReport match_points(const FrameObservation& frame1, const FrameObservation& frame2,
                         const MatchOptions& options = {});

/// Four frame-1 indices whose convex hull has the largest area, ordered so
/// the first three span the largest triangle.
std::array<std::size_t, 4> select_probes(const FrameObservation& frame1);

namespace reference {
/// Single-threaded matcher kept as the oracle for the parallel one.
MatchReport match_points(const FrameObservation& frame1, const FrameObservation& frame2,
                         const MatchOptions& options = {});
}  // namespace reference

/// A 3D reading of two frames: points in frame-1 coordinates (x, y equal to
/// the frame-1 observation, z depth) and the motion to frame 2.
struct TwoFrameInterpretation {
  std::vector<LabeledPoint3> points;
  RigidMotion motion;
};

/// One consistent interpretation built from the first three labels at the
/// default c², every further point triangulated along its two rays.
TwoFrameInterpretation interpret_two_frames(const FrameObservation& frame1,
                                            const FrameObservation& frame2,
                                            double tol = kDefaultTolerance);

struct AmbiguityMember {
  double angle = 0.0;  // radians
  std::vector<LabeledPoint3> points;
  RigidMotion motion;
  double reprojection1 = 0.0;  // max image distance, frame 1
  double reprojection2 = 0.0;  // max image distance, frame 2
  double max_displacement = 0.0;  // from the base structure
  bool parallel_rays = false;     // skipped: rotated rays never meet
};

/// Rotates the frame-2 ray bundle about the axis through the first point
/// that is orthogonal to both viewing directions (right-handed about
/// z x v2, v2 the frame-2 viewing direction in frame-1 coordinates) and
/// intersects with the frame-1 rays. Throws kInvalidInput when `base` does
/// not reproject onto both frames within tol * diameter, and kDegenerate
/// when the two viewing directions coincide.
std::vector<AmbiguityMember> ambiguity_family(const FrameObservation& frame1,
                                              const FrameObservation& frame2,
                                              const TwoFrameInterpretation& base,
                                              std::span<const double> angles,
                                              double tol = kDefaultTolerance);

/// Largest image distance between the projections of `points` (after
/// `motion`) and the labeled observations.
double reprojection_error(const std::vector<LabeledPoint3>& points, const RigidMotion& motion,
                          const FrameObservation& frame);

}  // namespace orthosfm
