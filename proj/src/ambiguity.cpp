#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "orthosfm/two_frame.hpp"

namespace orthosfm {

namespace {

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  if ((u * svd.matrixV().transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * svd.matrixV().transpose();
}

double frame_diameter(const FrameObservation& frame1, const FrameObservation& frame2) {
  std::array<FrameObservation, 2> frames{frame1, frame2};
  return std::sqrt(squared_diameter(frames));
}

void require_same_labels(const FrameObservation& frame1, const FrameObservation& frame2) {
  if (frame1.size() != frame2.size()) {
    throw Error(ErrorKind::kInvalidInput, "frames must hold the same points");
  }
  for (const auto& lp : frame1.points()) frame2.at(lp.label);
}

}  // namespace

double reprojection_error(const std::vector<LabeledPoint3>& points, const RigidMotion& motion,
                          const FrameObservation& frame) {
  double worst = 0.0;
  for (const auto& lp : points) {
    const Eigen::Vector2d img = motion.apply(lp.point.vec()).head<2>();
    worst = std::max(worst, (img - frame.at(lp.label).vec()).norm());
  }
  return worst;
}

TwoFrameInterpretation interpret_two_frames(const FrameObservation& frame1,
                                            const FrameObservation& frame2, double tol) {
  require_same_labels(frame1, frame2);
  const std::size_t n = frame1.size();
  std::vector<Eigen::Vector2d> x1(n), x2(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = frame1[i].point.vec();
    x2[i] = frame2.at(frame1[i].label).vec();
  }
  const std::array<Eigen::Vector2d, 3> t1{x1[0], x1[1], x1[2]};
  const std::array<Eigen::Vector2d, 3> t2{x2[0], x2[1], x2[2]};
  const auto sq = [](const std::array<Eigen::Vector2d, 3>& t) {
    return TriangleDistances{(t[0] - t[1]).squaredNorm(), (t[1] - t[2]).squaredNorm(),
                             (t[2] - t[0]).squaredNorm()};
  };
  const BofCCoeffs coeffs = b_of_c_coeffs(sq(t1), sq(t2), tol);

  // Any admissible c² gives a valid reading; with more than three points the
  // b branch whose predicted lines fit the remaining points wins.
  std::optional<TriangleTransfer> chosen;
  double c_sq = kInitialCFactor * kInitialCFactor *
                std::max((x1[2] - x1[0]).squaredNorm(), (x2[2] - x2[0]).squaredNorm());
  for (int step = 0; step <= kCScanSteps && !chosen; ++step, c_sq *= kCScanFactor * kCScanFactor) {
    double best_cost = std::numeric_limits<double>::infinity();
    for (double b_sq : solve_b_given_c(coeffs, c_sq, tol)) {
      auto transfer = TriangleTransfer::build(t1, t2, coeffs.a_sq(b_sq, c_sq), b_sq, c_sq, tol);
      if (!transfer) continue;
      double cost = 0.0;
      for (std::size_t i = 3; i < n; ++i) {
        const double d = transfer->transfer_ray(x1[i]).distance(x2[i]);
        cost += d * d;
      }
      if (!chosen || cost < best_cost) {
        best_cost = cost;
        chosen = std::move(transfer);
      }
    }
  }
  if (!chosen) throw Error(ErrorKind::kInconsistentLengths, "no admissible c² for these frames");

  const Eigen::Matrix3d rot = nearest_rotation(chosen->rotation());
  const auto& edges = chosen->rp1_rq1();
  const Eigen::Vector3d r3(x1[2].x(), x1[2].y(), 0.0);
  const Eigen::Vector2d translation = x2[2] - (rot * r3).head<2>();
  const Eigen::Vector2d view = rot.col(2).head<2>();
  if (!(view.norm() > 1e-12)) {
    throw Error(ErrorKind::kDegenerate, "in-plane motion: depth is unobservable");
  }

  TwoFrameInterpretation out;
  out.motion = RigidMotion(rot, translation);
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    if (i == 0) {
      z = edges[0].z();
    } else if (i == 1) {
      z = edges[1].z();
    } else if (i > 2) {
      const Eigen::Vector2d flat = (rot * Eigen::Vector3d(x1[i].x(), x1[i].y(), 0.0)).head<2>();
      z = view.dot(x2[i] - translation - flat) / view.squaredNorm();
    }
    out.points.push_back({frame1[i].label, Point3{x1[i].x(), x1[i].y(), z}});
  }
  return out;
}

std::vector<AmbiguityMember> ambiguity_family(const FrameObservation& frame1,
                                              const FrameObservation& frame2,
                                              const TwoFrameInterpretation& base,
                                              std::span<const double> angles, double tol) {
  require_same_labels(frame1, frame2);
  if (base.points.size() != frame1.size()) {
    throw Error(ErrorKind::kInvalidInput, "interpretation and frames differ in size");
  }
  const double diameter = frame_diameter(frame1, frame2);
  const double limit = tol * std::max(diameter, 1e-300);
  if (reprojection_error(base.points, RigidMotion::identity(), frame1) > limit ||
      reprojection_error(base.points, base.motion, frame2) > limit) {
    throw Error(ErrorKind::kInvalidInput, "base interpretation does not reproject onto both frames");
  }

  const Eigen::Matrix3d& rm = base.motion.rotation();
  const Eigen::Vector3d v1 = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d v2 = rm.row(2).transpose();  // frame-2 viewing direction
  const Eigen::Vector3d axis = v1.cross(v2);
  if (!(axis.norm() > 1e-12)) {
    throw Error(ErrorKind::kDegenerate, "viewing directions coincide; no ambiguity axis");
  }
  const Eigen::Vector3d n = axis.normalized();
  const Eigen::Vector3d pivot = base.points.front().point.vec();

  std::vector<AmbiguityMember> out;
  out.reserve(angles.size());
  for (double angle : angles) {
    AmbiguityMember m;
    m.angle = angle;
    if (angle == 0.0) {
      m.points = base.points;
      m.motion = base.motion;
    } else {
      const Eigen::Matrix3d rot = Eigen::AngleAxisd(angle, n).toRotationMatrix();
      const Eigen::Vector3d d2 = rot * v2;
      const Eigen::Vector2d d2_xy = d2.head<2>();
      if (!(d2_xy.norm() > 1e-9)) {
        m.parallel_rays = true;
        out.push_back(std::move(m));
        continue;
      }
      for (const auto& lp : base.points) {
        // Frame-1 ray X + s z meets the rotated frame-2 ray Y + u d2; both
        // lie in one plane orthogonal to the axis.
        const Eigen::Vector3d x = lp.point.vec();
        const Eigen::Vector3d y = pivot + rot * (x - pivot);
        const Eigen::Vector3d gap = y - x;
        const double u = -d2_xy.dot(gap.head<2>()) / d2_xy.squaredNorm();
        const double s = gap.z() + u * d2.z();
        m.points.push_back({lp.label, Point3{x.x(), x.y(), x.z() + s}});
      }
      const Eigen::Matrix3d new_rot = rm * rot.transpose();
      const Eigen::Vector3d shift = rm * pivot - new_rot * pivot;
      m.motion = RigidMotion(nearest_rotation(new_rot), base.motion.translation() + shift.head<2>());
    }
    m.reprojection1 = reprojection_error(m.points, RigidMotion::identity(), frame1);
    m.reprojection2 = reprojection_error(m.points, m.motion, frame2);
    for (std::size_t i = 0; i < m.points.size(); ++i) {
      m.max_displacement = std::max(
          m.max_displacement, (m.points[i].point.vec() - base.points[i].point.vec()).norm());
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace orthosfm
