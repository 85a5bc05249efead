#pragma once

// Core value types for orthographic multiframe recovery.
//
// Coordinates: the image plane is (x, y); z is depth along the viewing
// direction. Orthographic projection drops z, so translation along z is
// unobservable and RigidMotion carries an in-plane translation only.
//
// Edge convention for traced bodies (used by every solver):
//   triangle    P,Q,R   -> a=|PQ|, b=|QR|, c=|RP|
//   tetrahedron P,Q,R,T -> a=|PQ|, b=|QR|, c=|RP|, d=|TR|, f=|TP|, g=|TQ|
// All lengths are carried squared.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "orthosfm/error.hpp"

namespace orthosfm {

inline constexpr double kDefaultTolerance = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Eigen::Vector2d vec() const { return {x, y}; }
  static Point2 from(const Eigen::Vector2d& v) { return {v.x(), v.y()}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static Point3 from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

using Label = std::string;

struct LabeledPoint2 {
  Label label;
  Point2 point;
  friend bool operator==(const LabeledPoint2&, const LabeledPoint2&) = default;
};

struct LabeledPoint3 {
  Label label;
  Point3 point;
  friend bool operator==(const LabeledPoint3&, const LabeledPoint3&) = default;
};

/// Rotation plus in-plane translation. Construction checks orthonormality
/// and det = +1 to 1e-12 and throws kInvalidInput otherwise.
class RigidMotion {
 public:
  RigidMotion();
  RigidMotion(const Eigen::Matrix3d& rotation, const Eigen::Vector2d& translation);

  static RigidMotion identity() { return {}; }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector2d& translation() const { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector2d translation_;
};

bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-12);

Point2 project(const Point3& p);
Point3 apply_motion(const RigidMotion& m, const Point3& p);

/// Labeled 2D projections of the traced points in one frame.
class FrameObservation {
 public:
  FrameObservation() = default;
  /// Throws kInvalidInput on duplicate labels, non-finite coordinates or
  /// fewer than three points.
  explicit FrameObservation(std::vector<LabeledPoint2> points);

  const std::vector<LabeledPoint2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const LabeledPoint2& operator[](std::size_t i) const { return points_[i]; }

  std::optional<Point2> find(std::string_view label) const;
  /// Throws kLabelAbsent.
  const Point2& at(std::string_view label) const;
  std::vector<Label> labels() const;

  friend bool operator==(const FrameObservation&, const FrameObservation&) = default;

 private:
  std::vector<LabeledPoint2> points_;
};

struct TriangleDistances {
  double a_sq = 0.0;  // PQ
  double b_sq = 0.0;  // QR
  double c_sq = 0.0;  // RP

  std::array<double, 3> as_array() const { return {a_sq, b_sq, c_sq}; }
  double max() const;
};

struct TetraDistances {
  double a_sq = 0.0;  // PQ
  double b_sq = 0.0;  // QR
  double c_sq = 0.0;  // RP
  double d_sq = 0.0;  // TR
  double f_sq = 0.0;  // TP
  double g_sq = 0.0;  // TQ

  std::array<double, 6> as_array() const { return {a_sq, b_sq, c_sq, d_sq, f_sq, g_sq}; }
  static TetraDistances from_array(const std::array<double, 6>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
  double max() const;

  // The four faces, each in the (a, b, c) slot order the triangle
  // relations expect.
  TriangleDistances face_pqr() const { return {a_sq, b_sq, c_sq}; }
  TriangleDistances face_pqt() const { return {a_sq, g_sq, f_sq}; }
  TriangleDistances face_tqr() const { return {d_sq, b_sq, g_sq}; }
  TriangleDistances face_trp() const { return {d_sq, f_sq, c_sq}; }
};

/// Cayley-Menger determinant of four points given their squared pairwise
/// distances; equals 288 V^2 and is >= 0 for realizable tetrahedra.
double cayley_menger(const TetraDistances& t);

/// True iff every length is positive and the triangle inequality holds on
/// the square roots (within `rel_tol` of the longest edge).
bool is_valid(const TriangleDistances& t, double rel_tol = kDefaultTolerance);
bool is_valid(const TetraDistances& t, double rel_tol = kDefaultTolerance);

/// Squared projected distances between the named points in the fixed edge
/// order: 3 labels give PQ,QR,RP; 4 labels give PQ,QR,RP,TR,TP,TQ.
std::vector<double> projected_sq_distances(const FrameObservation& frame,
                                           std::span<const Label> labels);
TriangleDistances triangle_sq(const FrameObservation& frame,
                              std::span<const Label> labels);
TetraDistances tetra_sq(const FrameObservation& frame, std::span<const Label> labels);

/// Largest squared distance between any two points of any frame.
double squared_diameter(std::span<const FrameObservation> frames);

struct DofBalance {
  long long unknowns = 0;
  long long information = 0;
  bool recoverable = false;
};

/// Unknowns -1 + 3p + 5(k-1) against 2kp measured coordinates.
DofBalance dof_balance(long long points, long long frames);

/// Signed depth change across each edge of the triangle: z_Q - z_P,
/// z_R - z_Q, z_P - z_R. The three always sum to zero.
struct EdgeDepths {
  double pq = 0.0;
  double qr = 0.0;
  double rp = 0.0;

  /// Depths of P, Q, R relative to P.
  std::array<double, 3> point_depths() const { return {0.0, pq, pq + qr}; }
};

struct DepthEmbedding {
  std::array<EdgeDepths, 2> branches;  // mirror images: branches[1] = -branches[0]
};

/// Recovers the depth offsets of a triangle in one frame from its true and
/// projected squared lengths. Throws kInconsistentLengths when a projection
/// exceeds its true length or no sign pattern closes the triangle.
DepthEmbedding embed_depths(const TriangleDistances& true_sq,
                            const TriangleDistances& frame_sq,
                            double tol = kDefaultTolerance);

}  // namespace orthosfm
