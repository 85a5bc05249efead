#include "orthosfm/scene_sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

namespace orthosfm {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Label point_label(std::size_t i) {
  static constexpr const char* kNames[] = {"P", "Q", "R", "T", "S"};
  if (i < 5) return kNames[i];
  return "X" + std::to_string(i + 1);
}

namespace {

constexpr int kMaxDraws = 1000;

bool well_conditioned(const std::vector<Eigen::Vector3d>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if ((pts[i] - pts[j]).norm() < 0.05) return false;
    }
  }
  const double area = 0.5 * (pts[1] - pts[0]).cross(pts[2] - pts[0]).norm();
  if (area < 0.02) return false;
  if (pts.size() >= 4) {
    const double volume =
        std::abs((pts[1] - pts[0]).cross(pts[2] - pts[0]).dot(pts[3] - pts[0])) / 6.0;
    if (volume < 0.005) return false;
  }
  return true;
}

Eigen::Matrix3d uniform_rotation(std::mt19937_64& rng) {
  const double u1 = uniform01(rng), u2 = uniform01(rng), u3 = uniform01(rng);
  const double two_pi = 2.0 * std::numbers::pi;
  const double s1 = std::sqrt(1.0 - u1), s2 = std::sqrt(u1);
  Eigen::Quaterniond q(s2 * std::cos(two_pi * u3), s1 * std::sin(two_pi * u2),
                       s1 * std::cos(two_pi * u2), s2 * std::sin(two_pi * u3));
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace

std::vector<LabeledPoint3> gen_body(std::size_t n, std::uint64_t seed, const PointSampler& sampler) {
  if (n < 3) throw Error(ErrorKind::kInvalidInput, "a body needs at least three points");
  std::mt19937_64 rng(seed);
  const PointSampler draw = sampler ? sampler : [](std::mt19937_64& r) {
    const double x = uniform01(r), y = uniform01(r), z = uniform01(r);
    return Eigen::Vector3d(x, y, z);
  };
  std::vector<Eigen::Vector3d> pts(n);
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    for (auto& p : pts) p = draw(rng);
    if (!well_conditioned(pts)) continue;
    std::vector<LabeledPoint3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({point_label(i), Point3::from(pts[i])});
    return out;
  }
  throw std::logic_error("gen_body: no well-conditioned body after 1000 draws");
}

bool is_degenerate_motion(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  if (std::abs(aa.angle()) < 0.1) return true;
  return aa.axis().head<2>().norm() < 0.1;
}

RigidMotion gen_motion(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    const Eigen::Matrix3d r = uniform_rotation(rng);
    const double tx = 2.0 * uniform01(rng) - 1.0;
    const double ty = 2.0 * uniform01(rng) - 1.0;
    if (is_degenerate_motion(r)) continue;
    return RigidMotion(r, Eigen::Vector2d(tx, ty));
  }
  throw std::logic_error("gen_motion: no admissible motion after 1000 draws");
}

std::vector<RigidMotion> gen_motions(std::size_t n_frames, std::uint64_t seed) {
  std::vector<RigidMotion> motions{RigidMotion::identity()};
  std::uint64_t stream = 0;
  while (motions.size() < n_frames) {
    if (stream > kMaxDraws * n_frames) {
      throw std::logic_error("gen_motions: could not draw mutually generic motions");
    }
    const RigidMotion m = gen_motion(derive_seed(seed, stream++));
    bool ok = true;
    for (const auto& prev : motions) {
      if (is_degenerate_motion(m.rotation() * prev.rotation().transpose())) {
        ok = false;
        break;
      }
    }
    if (ok) motions.push_back(m);
  }
  return motions;
}

Scene gen_scene(std::size_t n_points, std::size_t n_frames, std::uint64_t seed) {
  return make_scene(gen_body(n_points, derive_seed(seed, 0)), n_frames, seed);
}

Scene make_scene(std::vector<LabeledPoint3> body, std::size_t n_frames, std::uint64_t seed) {
  if (n_frames < 1) throw Error(ErrorKind::kInvalidInput, "a scene needs at least one frame");
  Scene s;
  s.body = std::move(body);
  s.motions = gen_motions(n_frames, derive_seed(seed, 1));
  s.seed = seed;
  return s;
}

std::vector<LabeledPoint3> body_from_triangle(const TriangleDistances& lengths, std::uint64_t seed) {
  if (!is_valid(lengths)) throw Error(ErrorKind::kInvalidInput, "not a valid triangle");
  // P at the origin, Q on the x axis, R from the law of cosines at P.
  const double a = std::sqrt(lengths.a_sq);
  const double rx = (lengths.a_sq + lengths.c_sq - lengths.b_sq) / (2.0 * a);
  const double ry = std::sqrt(std::max(lengths.c_sq - rx * rx, 0.0));
  const std::array<Eigen::Vector3d, 3> local{
      Eigen::Vector3d::Zero(), Eigen::Vector3d(a, 0, 0), Eigen::Vector3d(rx, ry, 0)};
  const Eigen::Vector3d centroid = (local[0] + local[1] + local[2]) / 3.0;

  std::mt19937_64 rng(seed);
  const Eigen::Matrix3d r = uniform_rotation(rng);
  std::vector<LabeledPoint3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back({point_label(i), Point3::from(r * (local[i] - centroid))});
  }
  return out;
}

namespace {

double sq3(const Point3& u, const Point3& v) { return (u.vec() - v.vec()).squaredNorm(); }

}  // namespace

TriangleDistances true_triangle(const std::vector<LabeledPoint3>& body) {
  if (body.size() < 3) throw Error(ErrorKind::kInvalidInput, "body has fewer than 3 points");
  const auto& p = body[0].point;
  const auto& q = body[1].point;
  const auto& r = body[2].point;
  return {sq3(p, q), sq3(q, r), sq3(r, p)};
}

TetraDistances true_tetra(const std::vector<LabeledPoint3>& body) {
  if (body.size() < 4) throw Error(ErrorKind::kInvalidInput, "body has fewer than 4 points");
  const auto& p = body[0].point;
  const auto& q = body[1].point;
  const auto& r = body[2].point;
  const auto& t = body[3].point;
  return {sq3(p, q), sq3(q, r), sq3(r, p), sq3(t, r), sq3(t, p), sq3(t, q)};
}

std::vector<FrameObservation> render(const Scene& scene) {
  std::vector<FrameObservation> frames;
  frames.reserve(scene.motions.size());
  for (const auto& m : scene.motions) {
    std::vector<LabeledPoint2> pts;
    pts.reserve(scene.body.size());
    for (const auto& lp : scene.body) {
      pts.push_back({lp.label, project(apply_motion(m, lp.point))});
    }
    frames.emplace_back(std::move(pts));
  }
  return frames;
}

std::vector<FrameObservation> add_noise(const std::vector<FrameObservation>& frames,
                                        const NoiseSpec& spec) {
  if (!(spec.level >= 0.0)) throw Error(ErrorKind::kInvalidInput, "noise level must be >= 0");
  if (spec.level == 0.0) return frames;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.level / 3.0);
  const auto eps = [&]() {
    if (spec.distribution == NoiseDistribution::kGaussian) return normal(rng);
    return spec.level * (2.0 * uniform01(rng) - 1.0);
  };
  std::vector<FrameObservation> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    std::vector<LabeledPoint2> pts = f.points();
    for (auto& lp : pts) {
      lp.point.x *= 1.0 + eps();
      lp.point.y *= 1.0 + eps();
    }
    out.emplace_back(std::move(pts));
  }
  return out;
}

}  // namespace orthosfm
