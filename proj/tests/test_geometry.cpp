#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "orthosfm/geometry.hpp"
#include "orthosfm/scene_sim.hpp"
#include "test_support.hpp"

namespace orthosfm {
namespace {

using testing::kTri;

FrameObservation triangle_frame(double x2, double y2) {
  return FrameObservation({{"P", {0, 0}}, {"Q", {1, 0}}, {"R", {x2, y2}}});
}

TEST(RigidMotion, AcceptsRotations) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const RigidMotion m(r, {0.5, -0.25});
  const Eigen::Vector3d p(1, 2, 3);
  EXPECT_TRUE(m.apply(p).isApprox(r * p + Eigen::Vector3d(0.5, -0.25, 0.0)));
}

TEST(RigidMotion, RejectsScaledMatrix) {
  EXPECT_THROW(RigidMotion(2.0 * Eigen::Matrix3d::Identity(), {0, 0}), Error);
}

TEST(RigidMotion, RejectsReflection) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r(2, 2) = -1.0;
  try {
    RigidMotion m(r, {0, 0});
    FAIL() << "reflection accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(Projection, DropsDepth) {
  const Point2 p = project({1.5, -2.0, 7.0});
  EXPECT_EQ(p, (Point2{1.5, -2.0}));
}

TEST(Projection, DepthTranslationIsInvisible) {
  // Moving along the viewing direction changes nothing in the image.
  const Point3 a{0.3, 0.4, 0.5};
  const Point3 b{0.3, 0.4, -9.0};
  EXPECT_EQ(project(a), project(b));
}

TEST(FrameObservation, RejectsTooFewPoints) {
  EXPECT_THROW(FrameObservation({{"P", {0, 0}}, {"Q", {1, 0}}}), Error);
}

TEST(FrameObservation, RejectsDuplicateLabels) {
  EXPECT_THROW(FrameObservation({{"P", {0, 0}}, {"Q", {1, 0}}, {"P", {2, 0}}}), Error);
}

TEST(FrameObservation, RejectsNonFinite) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(FrameObservation({{"P", {0, 0}}, {"Q", {1, nan}}, {"R", {2, 0}}}), Error);
}

TEST(FrameObservation, MissingLabelIsReported) {
  const auto f = triangle_frame(0, 1);
  EXPECT_FALSE(f.find("T").has_value());
  try {
    f.at("T");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLabelAbsent);
  }
}

TEST(ProjectedDistances, EdgeOrder) {
  const auto f = triangle_frame(0, 2);
  const auto t = triangle_sq(f, kTri);
  EXPECT_DOUBLE_EQ(t.a_sq, 1.0);  // PQ
  EXPECT_DOUBLE_EQ(t.b_sq, 5.0);  // QR
  EXPECT_DOUBLE_EQ(t.c_sq, 4.0);  // RP
}

TEST(ProjectedDistances, TetraOrder) {
  const FrameObservation f({{"P", {0, 0}}, {"Q", {1, 0}}, {"R", {0, 2}}, {"T", {3, 3}}});
  const auto t = tetra_sq(f, testing::kTet);
  EXPECT_DOUBLE_EQ(t.d_sq, 9.0 + 1.0);   // TR
  EXPECT_DOUBLE_EQ(t.f_sq, 18.0);        // TP
  EXPECT_DOUBLE_EQ(t.g_sq, 4.0 + 9.0);   // TQ
  EXPECT_EQ(t.face_pqt().as_array(), (std::array<double, 3>{t.a_sq, t.g_sq, t.f_sq}));
}

TEST(SquaredDiameter, LargestOverAllFrames) {
  const std::vector<FrameObservation> frames{triangle_frame(0, 1), triangle_frame(0, 3)};
  EXPECT_DOUBLE_EQ(squared_diameter(frames), 10.0);
}

TEST(CayleyMenger, RegularTetrahedron) {
  // Unit edges: V = 1/(6 sqrt 2), V² = 1/72, so 288 V² = 4.
  const TetraDistances t{1, 1, 1, 1, 1, 1};
  EXPECT_NEAR(cayley_menger(t), 4.0, 1e-12);
  EXPECT_TRUE(is_valid(t));
}

TEST(CayleyMenger, MatchesVolumeOfRandomTetrahedra) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto body = gen_body(4, seed);
    const Eigen::Vector3d p = body[0].point.vec(), q = body[1].point.vec(),
                          r = body[2].point.vec(), t = body[3].point.vec();
    const double volume = std::abs((q - p).cross(r - p).dot(t - p)) / 6.0;
    EXPECT_NEAR(cayley_menger(true_tetra(body)), 288.0 * volume * volume, 1e-12);
  }
}

TEST(CayleyMenger, FlatTetrahedronIsInvalid) {
  // T in the plane of P, Q, R.
  const Eigen::Vector3d p(0, 0, 0), q(1, 0, 0), r(0, 1, 0), t(0.3, 0.3, 0);
  const TetraDistances d{(p - q).squaredNorm(), (q - r).squaredNorm(), (r - p).squaredNorm(),
                         (t - r).squaredNorm(), (t - p).squaredNorm(), (t - q).squaredNorm()};
  EXPECT_NEAR(cayley_menger(d), 0.0, 1e-12);
}

TEST(TriangleValidity, TriangleInequality) {
  EXPECT_TRUE(is_valid(TriangleDistances{9, 16, 25}));
  EXPECT_FALSE(is_valid(TriangleDistances{1, 1, 9}));
  EXPECT_FALSE(is_valid(TriangleDistances{-1, 1, 1}));
}

TEST(DofBalance, SmallCounts) {
  const auto d33 = dof_balance(3, 3);
  EXPECT_EQ(d33.unknowns, 18);
  EXPECT_EQ(d33.information, 18);
  EXPECT_TRUE(d33.recoverable);
  const auto d42 = dof_balance(4, 2);
  EXPECT_EQ(d42.unknowns, 16);
  EXPECT_EQ(d42.information, 16);
  EXPECT_TRUE(d42.recoverable);
  const auto d22 = dof_balance(2, 2);
  EXPECT_EQ(d22.unknowns, 10);
  EXPECT_EQ(d22.information, 8);
  EXPECT_FALSE(d22.recoverable);
}

TEST(DofBalance, MatchesFormula) {
  for (long long p = 1; p <= 12; ++p) {
    for (long long k = 1; k <= 12; ++k) {
      const auto d = dof_balance(p, k);
      EXPECT_EQ(d.unknowns, -1 + 3 * p + 5 * (k - 1));
      EXPECT_EQ(d.information, 2 * k * p);
      EXPECT_EQ(d.recoverable, d.unknowns <= d.information);
    }
  }
}

TEST(DofBalance, RejectsNonPositiveCounts) {
  EXPECT_THROW(dof_balance(0, 3), Error);
  EXPECT_THROW(dof_balance(3, 0), Error);
}

TEST(EmbedDepths, RecoversTrueDepthsUpToMirror) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scene s = gen_scene(3, 2, seed);
    const auto frames = render(s);
    const auto truth = true_triangle(s.body);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      std::array<double, 3> z{};
      for (std::size_t i = 0; i < 3; ++i) {
        z[i] = s.motions[f].apply(s.body[i].point.vec()).z();
      }
      const auto e = embed_depths(truth, triangle_sq(frames[f], kTri));
      const double want_pq = z[1] - z[0], want_qr = z[2] - z[1];
      bool found = false;
      for (const auto& b : e.branches) {
        const double scale = std::sqrt(truth.max());
        if (std::abs(b.pq - want_pq) < 1e-6 * scale && std::abs(b.qr - want_qr) < 1e-6 * scale) {
          found = true;
        }
        EXPECT_NEAR(b.pq + b.qr + b.rp, 0.0, 1e-9 * scale);
      }
      EXPECT_TRUE(found) << "seed " << seed << " frame " << f;
      EXPECT_DOUBLE_EQ(e.branches[1].pq, -e.branches[0].pq);
    }
  }
}

TEST(EmbedDepths, ProjectionLongerThanTruthIsInconsistent) {
  try {
    embed_depths(TriangleDistances{1, 1, 1}, TriangleDistances{4, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInconsistentLengths);
  }
}

}  // namespace
}  // namespace orthosfm
