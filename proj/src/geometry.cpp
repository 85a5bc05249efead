#include "orthosfm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <Eigen/Dense>

namespace orthosfm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kLabelAbsent: return "labeled-point-absent";
    case ErrorKind::kInconsistentLengths: return "inconsistent-lengths";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kSingularSystem: return "singular-system";
    case ErrorKind::kParse: return "parse";
  }
  return "unknown";
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

RigidMotion::RigidMotion()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector2d::Zero()) {}

RigidMotion::RigidMotion(const Eigen::Matrix3d& rotation, const Eigen::Vector2d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) {
    throw Error(ErrorKind::kInvalidInput, "rotation is not orthonormal with det +1");
  }
  if (!translation_.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "translation is not finite");
  }
}

Eigen::Vector3d RigidMotion::apply(const Eigen::Vector3d& p) const {
  Eigen::Vector3d out = rotation_ * p;
  out.x() += translation_.x();
  out.y() += translation_.y();
  return out;
}

Point2 project(const Point3& p) { return {p.x, p.y}; }

Point3 apply_motion(const RigidMotion& m, const Point3& p) {
  return Point3::from(m.apply(p.vec()));
}

FrameObservation::FrameObservation(std::vector<LabeledPoint2> points)
    : points_(std::move(points)) {
  if (points_.size() < 3) {
    throw Error(ErrorKind::kInvalidInput, "a frame needs at least three points");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& lp : points_) {
    if (!std::isfinite(lp.point.x) || !std::isfinite(lp.point.y)) {
      throw Error(ErrorKind::kInvalidInput, "non-finite coordinate for '" + lp.label + "'");
    }
    if (!seen.insert(lp.label).second) {
      throw Error(ErrorKind::kInvalidInput, "duplicate label '" + lp.label + "'");
    }
  }
}

std::optional<Point2> FrameObservation::find(std::string_view label) const {
  for (const auto& lp : points_) {
    if (lp.label == label) return lp.point;
  }
  return std::nullopt;
}

const Point2& FrameObservation::at(std::string_view label) const {
  for (const auto& lp : points_) {
    if (lp.label == label) return lp.point;
  }
  throw Error(ErrorKind::kLabelAbsent, "labeled point '" + std::string(label) + "' absent from frame");
}

std::vector<Label> FrameObservation::labels() const {
  std::vector<Label> out;
  out.reserve(points_.size());
  for (const auto& lp : points_) out.push_back(lp.label);
  return out;
}

double TriangleDistances::max() const { return std::max({a_sq, b_sq, c_sq}); }

double TetraDistances::max() const {
  const auto v = as_array();
  return *std::max_element(v.begin(), v.end());
}

double cayley_menger(const TetraDistances& t) {
  // Point order P, Q, R, T.
  Eigen::Matrix<double, 5, 5> m;
  m << 0, 1, 1, 1, 1,
       1, 0, t.a_sq, t.c_sq, t.f_sq,
       1, t.a_sq, 0, t.b_sq, t.g_sq,
       1, t.c_sq, t.b_sq, 0, t.d_sq,
       1, t.f_sq, t.g_sq, t.d_sq, 0;
  return m.determinant();
}

namespace {

bool triangle_inequality(double x_sq, double y_sq, double z_sq, double rel_tol) {
  const double x = std::sqrt(x_sq), y = std::sqrt(y_sq), z = std::sqrt(z_sq);
  const double slack = rel_tol * std::max({x, y, z});
  return x <= y + z + slack && y <= x + z + slack && z <= x + y + slack;
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

bool is_valid(const TriangleDistances& t, double rel_tol) {
  return positive_finite(t.a_sq) && positive_finite(t.b_sq) && positive_finite(t.c_sq) &&
         triangle_inequality(t.a_sq, t.b_sq, t.c_sq, rel_tol);
}

bool is_valid(const TetraDistances& t, double rel_tol) {
  for (double v : t.as_array()) {
    if (!positive_finite(v)) return false;
  }
  for (const auto& f : {t.face_pqr(), t.face_pqt(), t.face_tqr(), t.face_trp()}) {
    if (!triangle_inequality(f.a_sq, f.b_sq, f.c_sq, rel_tol)) return false;
  }
  const double scale = t.max();
  return cayley_menger(t) >= -rel_tol * scale * scale * scale;
}

namespace {

double sq_dist(const Point2& u, const Point2& v) {
  const double dx = u.x - v.x, dy = u.y - v.y;
  return dx * dx + dy * dy;
}

}  // namespace

std::vector<double> projected_sq_distances(const FrameObservation& frame,
                                           std::span<const Label> labels) {
  if (labels.size() != 3 && labels.size() != 4) {
    throw Error(ErrorKind::kInvalidInput, "edge order is defined for 3 or 4 labels");
  }
  const Point2& p = frame.at(labels[0]);
  const Point2& q = frame.at(labels[1]);
  const Point2& r = frame.at(labels[2]);
  std::vector<double> out{sq_dist(p, q), sq_dist(q, r), sq_dist(r, p)};
  if (labels.size() == 4) {
    const Point2& t = frame.at(labels[3]);
    out.push_back(sq_dist(t, r));
    out.push_back(sq_dist(t, p));
    out.push_back(sq_dist(t, q));
  }
  return out;
}

TriangleDistances triangle_sq(const FrameObservation& frame, std::span<const Label> labels) {
  if (labels.size() != 3) throw Error(ErrorKind::kInvalidInput, "triangle needs 3 labels");
  const auto d = projected_sq_distances(frame, labels);
  return {d[0], d[1], d[2]};
}

TetraDistances tetra_sq(const FrameObservation& frame, std::span<const Label> labels) {
  if (labels.size() != 4) throw Error(ErrorKind::kInvalidInput, "tetrahedron needs 4 labels");
  const auto d = projected_sq_distances(frame, labels);
  return {d[0], d[1], d[2], d[3], d[4], d[5]};
}

double squared_diameter(std::span<const FrameObservation> frames) {
  double best = 0.0;
  for (const auto& f : frames) {
    const auto& pts = f.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        best = std::max(best, sq_dist(pts[i].point, pts[j].point));
      }
    }
  }
  return best;
}

DofBalance dof_balance(long long points, long long frames) {
  if (points < 1 || frames < 1) {
    throw Error(ErrorKind::kInvalidInput, "dof_balance needs p >= 1 and k >= 1");
  }
  DofBalance out;
  out.unknowns = -1 + 3 * points + 5 * (frames - 1);
  out.information = 2 * frames * points;
  out.recoverable = out.unknowns <= out.information;
  return out;
}

DepthEmbedding embed_depths(const TriangleDistances& true_sq, const TriangleDistances& frame_sq,
                            double tol) {
  const double scale = std::max({true_sq.max(), frame_sq.max(), 1e-300});
  const double sq_tol = tol * scale;

  const auto excess = [&](double full, double proj) {
    const double e = full - proj;
    if (!(e >= -sq_tol)) {
      throw Error(ErrorKind::kInconsistentLengths,
                  "projected length exceeds the true length");
    }
    return std::sqrt(std::max(e, 0.0));
  };
  const double u = excess(true_sq.a_sq, frame_sq.a_sq);
  const double v = excess(true_sq.b_sq, frame_sq.b_sq);
  const double w = excess(true_sq.c_sq, frame_sq.c_sq);

  // One edge's depth change must equal the sum of the other two.
  const std::array<EdgeDepths, 3> patterns{{{u, v, -w}, {u, -v, w}, {-u, v, w}}};
  std::size_t best = 0;
  double best_gap = std::abs(u + v - w);
  for (std::size_t i = 1; i < patterns.size(); ++i) {
    const auto& p = patterns[i];
    const double gap = std::abs(p.pq + p.qr + p.rp);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  if (best_gap > std::sqrt(sq_tol)) {
    throw Error(ErrorKind::kInconsistentLengths, "no sign pattern closes the triangle");
  }
  const EdgeDepths& e = patterns[best];
  return DepthEmbedding{{e, EdgeDepths{-e.pq, -e.qr, -e.rp}}};
}

}  // namespace orthosfm
