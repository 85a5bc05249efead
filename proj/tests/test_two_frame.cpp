#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "orthosfm/scene_sim.hpp"
#include "orthosfm/solvers.hpp"
#include "orthosfm/two_frame.hpp"
#include "test_support.hpp"

namespace orthosfm {
namespace {

using testing::kTri;

// The quartic relation written out longhand, kept apart from the library.
double quartic(double A, double B, double C, const TriangleDistances& f) {
  const auto F = [](double x, double y, double z) {
    return x * x + y * y + z * z - 2 * x * y - 2 * x * z - 2 * y * z;
  };
  return F(A, B, C) + F(f.a_sq, f.b_sq, f.c_sq) + 2 * (-f.a_sq + f.b_sq + f.c_sq) * A +
         2 * (f.a_sq - f.b_sq + f.c_sq) * B + 2 * (f.a_sq + f.b_sq - f.c_sq) * C;
}

// Quartic of frame 1 after eliminating A with the frame difference, which
// is linear in A.
double eliminated(double B, double C, const TriangleDistances& f1, const TriangleDistances& f2) {
  // quartic(A) = A² + u_i A + v_i; the A² terms cancel in the difference.
  const auto split = [&](const TriangleDistances& f) {
    const double v = quartic(0.0, B, C, f);
    const double u = 0.5 * (quartic(1.0, B, C, f) - quartic(-1.0, B, C, f));
    return std::pair{u, v};
  };
  const auto [u1, v1] = split(f1);
  const auto [u2, v2] = split(f2);
  const double A = -(v1 - v2) / (u1 - u2);
  return quartic(A, B, C, f1);
}

std::pair<TriangleDistances, TriangleDistances> two_frames(std::uint64_t seed,
                                                           std::vector<LabeledPoint3>* body = nullptr) {
  const Scene s = gen_scene(3, 2, seed);
  if (body) *body = s.body;
  const auto frames = render(s);
  return {triangle_sq(frames[0], kTri), triangle_sq(frames[1], kTri)};
}

Quad2 quad(const FrameObservation& f) {
  return {f[0].point.vec(), f[1].point.vec(), f[2].point.vec(), f[3].point.vec()};
}

double diameter(const FrameObservation& a, const FrameObservation& b) {
  std::array<FrameObservation, 2> f{a, b};
  return std::sqrt(squared_diameter(f));
}

// Frame 2 of a 4-point scene in which T follows its own random motion.
std::array<FrameObservation, 2> non_rigid(std::uint64_t seed) {
  const Scene s = gen_scene(4, 2, seed);
  const RigidMotion other = gen_motion(derive_seed(seed, 99));
  auto pts = render(s)[1].points();
  pts[3].point = project(apply_motion(other, s.body[3].point));
  return {render(s)[0], FrameObservation(std::move(pts))};
}

FrameObservation rotate_in_plane(const FrameObservation& f, double angle, Eigen::Vector2d shift) {
  const Eigen::Rotation2Dd r(angle);
  auto pts = f.points();
  for (auto& lp : pts) lp.point = Point2::from(r * lp.point.vec() + shift);
  return FrameObservation(std::move(pts));
}

TEST(BofC, AgreesWithDirectElimination) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [f1, f2] = two_frames(seed);
    const BofCCoeffs k = b_of_c_coeffs(f1, f2);
    const double s = std::max(f1.max(), f2.max());
    for (double B : {0.1, 0.9, 2.5}) {
      for (double C : {0.2, 1.1, 3.0}) {
        const double want = eliminated(B * s, C * s, f1, f2);
        EXPECT_NEAR(k.evaluate(B * s, C * s), want, 1e-10 * std::max(std::abs(want), s * s))
            << seed;
      }
    }
  }
}

TEST(BofC, CoefficientsMatchInterpolatedPolynomial) {
  // Recover the six coefficients by interpolating the eliminated relation
  // at six points of general position and compare one by one.
  const auto [f1, f2] = two_frames(17);
  const BofCCoeffs k = b_of_c_coeffs(f1, f2);
  const std::array<std::pair<double, double>, 6> nodes{
      {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}, {1, 1}}};
  Eigen::Matrix<double, 6, 6> m;
  Eigen::Matrix<double, 6, 1> rhs;
  for (int i = 0; i < 6; ++i) {
    const auto [B, C] = nodes[static_cast<std::size_t>(i)];
    m.row(i) << B * B, B * C, B, C, C * C, 1.0;
    rhs(i) = eliminated(B, C, f1, f2);
  }
  const Eigen::Matrix<double, 6, 1> c = m.fullPivLu().solve(rhs);
  const std::array<double, 6> got{k.f_b2, k.f_cb, k.f_b, k.f_c, k.f_c2, k.f_cst};
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(got[static_cast<std::size_t>(i)], c(i), 1e-9 * (1.0 + std::abs(c(i)))) << i;
  }
}

TEST(BofC, VanishesAtGroundTruth) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::vector<LabeledPoint3> body;
    const auto [f1, f2] = two_frames(seed, &body);
    const auto t = true_triangle(body);
    const double s = std::max({t.max(), f1.max(), f2.max()});
    const BofCCoeffs k = b_of_c_coeffs(f1, f2);
    EXPECT_LT(std::abs(k.evaluate(t.b_sq, t.c_sq)), 1e-9 * s * s);
    EXPECT_NEAR(k.a_sq(t.b_sq, t.c_sq), t.a_sq, 1e-9 * s);
  }
}

TEST(BofC, IdenticalFramesAreDegenerate) {
  const auto [f1, f2] = two_frames(1);
  (void)f2;
  try {
    b_of_c_coeffs(f1, f1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

TEST(SolveBGivenC, TrueBIsAmongRoots) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::vector<LabeledPoint3> body;
    const auto [f1, f2] = two_frames(seed, &body);
    const auto t = true_triangle(body);
    const auto roots = solve_b_given_c(b_of_c_coeffs(f1, f2), t.c_sq);
    ASSERT_FALSE(roots.empty()) << seed;
    double best = INFINITY;
    for (double b : roots) best = std::min(best, std::abs(b - t.b_sq) / t.b_sq);
    EXPECT_LT(best, 1e-9) << seed;
  }
}

TEST(SolveBGivenC, ZeroDiscriminantGivesDoubleRoot) {
  // (b² - 1)² = 0.
  BofCCoeffs k;
  k.f_b2 = 1.0;
  k.f_b = -2.0;
  k.f_cst = 1.0;
  EXPECT_DOUBLE_EQ(k.discriminant(0.7), 0.0);
  const auto roots = solve_b_given_c(k, 0.7);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_DOUBLE_EQ(roots[0], 1.0);
}

TEST(SolveBGivenC, SmallCHasNoSolution) {
  // Shrinking c eventually leaves no real b; the discriminant turns negative.
  int found = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::vector<LabeledPoint3> body;
    const auto [f1, f2] = two_frames(seed, &body);
    const BofCCoeffs k = b_of_c_coeffs(f1, f2);
    for (double c = true_triangle(body).c_sq; c > 1e-6; c *= 0.9) {
      if (k.discriminant(c) < 0.0) {
        EXPECT_TRUE(solve_b_given_c(k, c).empty());
        ++found;
        break;
      }
    }
  }
  EXPECT_GT(found, 0);
}

TEST(FourPoint, TrueAssignmentAtTrueC) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene s = gen_scene(4, 2, seed);
    const auto frames = render(s);
    const auto r = collinearity_residual_4pt(frames[0], frames[1], Assignment{},
                                             true_triangle(s.body).c_sq);
    ASSERT_TRUE(r.has_value()) << seed;
    EXPECT_LT(r->residual, 1e-9 * diameter(frames[0], frames[1])) << seed;
  }
}

TEST(FourPoint, ReportedBranchIsAnAdmissibleRoot) {
  // Both b branches at the true c are consistent readings of the same two
  // frames, so either may carry the minimum; it must be one of the roots.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scene s = gen_scene(4, 2, seed);
    const auto frames = render(s);
    const auto t = true_triangle(s.body);
    const auto r = collinearity_residual_4pt(frames[0], frames[1], Assignment{}, t.c_sq);
    ASSERT_TRUE(r.has_value());
    EXPECT_LT(r->residual, 1e-9 * diameter(frames[0], frames[1])) << seed;
    const BofCCoeffs k = b_of_c_coeffs(triangle_sq(frames[0], kTri), triangle_sq(frames[1], kTri));
    const auto roots = solve_b_given_c(k, t.c_sq);
    ASSERT_LT(r->branch, roots.size());
    EXPECT_EQ(r->c_sq, t.c_sq);
    EXPECT_NEAR(std::abs(k.evaluate(r->b_sq, r->c_sq)), 0.0, 1e-9 * t.max() * t.max()) << seed;
  }
}

TEST(FourPoint, SwappedAssignmentIsLarge) {
  int large = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene s = gen_scene(4, 2, seed);
    const auto frames = render(s);
    const double d = diameter(frames[0], frames[1]);
    const double good = rigidity_score(frames[0], frames[1]);
    const auto fit = fit_four_points(quad(frames[0]), Quad2{frames[1][0].point.vec(),
                                                            frames[1][1].point.vec(),
                                                            frames[1][3].point.vec(),
                                                            frames[1][2].point.vec()},
                                     kDefaultTolerance);
    if (!fit) continue;
    ++total;
    if (fit->score.residual > 1e-3 * d) ++large;
    EXPECT_GT(fit->score.residual, good) << seed;
  }
  EXPECT_GE(large, total * 95 / 100);
}

TEST(FourPoint, PointOnPredictedLineScoresZero) {
  const Scene s = gen_scene(4, 2, 5);
  const auto frames = render(s);
  const auto t = true_triangle(s.body);
  Quad2 f1 = quad(frames[0]), f2 = quad(frames[1]);
  const BofCCoeffs k = b_of_c_coeffs(triangle_sq(frames[0], kTri), triangle_sq(frames[1], kTri));
  const auto roots = solve_b_given_c(k, t.c_sq);
  ASSERT_FALSE(roots.empty());
  const auto tr = TriangleTransfer::build({f1[0], f1[1], f1[2]}, {f2[0], f2[1], f2[2]},
                                          k.a_sq(roots[0], t.c_sq), roots[0], t.c_sq);
  ASSERT_TRUE(tr.has_value());
  // Move T1 anywhere, then put T2 on its predicted line.
  f1[3] += Eigen::Vector2d(0.13, -0.07);
  const Line2 line = tr->transfer_ray(f1[3]);
  f2[3] = line.origin + 0.37 * line.direction;
  const auto r = collinearity_residual(f1, f2, t.c_sq, kDefaultTolerance);
  ASSERT_TRUE(r.has_value());
  EXPECT_LT(r->residual, 1e-12);
}

TEST(Rigidity, RigidBodiesScoreZero) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto frames = render(gen_scene(4, 2, seed));
    EXPECT_LT(rigidity_score(frames[0], frames[1]), 1e-9 * diameter(frames[0], frames[1])) << seed;
  }
}

TEST(Rigidity, AgreesWithAffineEpipolarOracle) {
  int agree = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (bool rigid : {true, false}) {
      std::array<FrameObservation, 2> f;
      if (rigid) {
        const auto r = render(gen_scene(4, 2, seed));
        f = {r[0], r[1]};
      } else {
        f = non_rigid(seed);
      }
      const double d = diameter(f[0], f[1]);
      const bool ours = rigidity_score(f[0], f[1]) <= 1e-6 * d;
      const auto q1 = quad(f[0]), q2 = quad(f[1]);
      const bool oracle = testing::affine_epipolar_defect(q1, q2) <= 1e-6;
      ++total;
      if (ours == oracle) ++agree;
      if (rigid) {
        EXPECT_TRUE(ours && oracle) << seed;
      }
    }
  }
  EXPECT_EQ(agree, total);
}

TEST(Rigidity, IndependentFourthPointIsDetected) {
  int detected = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto f = non_rigid(seed);
    if (rigidity_score(f[0], f[1]) > 1e-6 * diameter(f[0], f[1])) ++detected;
  }
  EXPECT_GE(detected, 297);
}

TEST(Rigidity, InPlaneMotionIsFlagged) {
  // A pure in-plane rotation carries no depth information.
  const auto f1 = render(gen_scene(4, 1, 3))[0];
  const auto f2 = rotate_in_plane(f1, 0.8, {0.2, 0.1});
  try {
    const double score = rigidity_score(f1, f2);
    EXPECT_TRUE(std::isinf(score));
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

TEST(Rigidity, InvariantUnderInPlaneRotationOfEitherFrame) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto f = non_rigid(seed);
    const double base = rigidity_score(f[0], f[1]);
    const double r2 = rigidity_score(f[0], rotate_in_plane(f[1], 1.1, {0.3, -0.4}));
    const double r1 = rigidity_score(rotate_in_plane(f[0], -0.6, {1.0, 2.0}), f[1]);
    EXPECT_NEAR(r2, base, 1e-7 * (1.0 + base)) << seed;
    EXPECT_NEAR(r1, base, 1e-7 * (1.0 + base)) << seed;
  }
}

TEST(FivePoint, RigidBodiesScoreZero) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto frames = render(gen_scene(5, 2, seed));
    const auto r = residual_5pt(frames[0], frames[1]);
    EXPECT_LT(r.residual, 1e-9 * diameter(frames[0], frames[1])) << seed;
  }
}

TEST(FivePoint, OffBodyPointIsDetected) {
  int detected = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Scene s = gen_scene(5, 2, seed);
    auto frames = render(s);
    auto pts = frames[1].points();
    pts[4].point = project(apply_motion(gen_motion(derive_seed(seed, 77)), s.body[4].point));
    frames[1] = FrameObservation(std::move(pts));
    if (residual_5pt(frames[0], frames[1]).residual > 1e-6 * diameter(frames[0], frames[1])) {
      ++detected;
    }
  }
  EXPECT_GE(detected, 297);
}

TEST(FivePoint, PointOnBasisIsFlagged) {
  // S at P: the transferred points coincide and the line degenerates.
  const Scene s = gen_scene(4, 2, 8);
  auto frames = render(s);
  std::array<FrameObservation, 2> five;
  for (std::size_t f = 0; f < 2; ++f) {
    auto pts = frames[f].points();
    pts.push_back({"S", pts[0].point});
    five[f] = FrameObservation(std::move(pts));
  }
  const auto r = residual_5pt(five[0], five[1]);
  EXPECT_TRUE(r.line_degenerate);
  EXPECT_LT(r.residual, 1e-12);
}

TEST(FivePoint, ParallelBasisIsDegenerate) {
  // T on the line through P and Q in frame 1.
  const FrameObservation f1({{"P", {0, 0}}, {"Q", {1, 0}}, {"R", {0, 1}}, {"T", {2, 0}}, {"S", {0.3, 0.4}}});
  const FrameObservation f2({{"P", {0, 0}}, {"Q", {1, 0.2}}, {"R", {0.1, 1}}, {"T", {2, 0.1}}, {"S", {0.3, 0.5}}});
  try {
    residual_5pt(f1, f2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

}  // namespace
}  // namespace orthosfm
