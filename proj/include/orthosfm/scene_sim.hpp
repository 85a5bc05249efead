#pragma once

// Ground-truth scene generation: random rigid bodies, random motions,
// orthographic rendering and multiplicative coordinate noise.
//
// Seeds: every randomized function takes an explicit 64-bit seed. Derived
// streams use derive_seed(base, stream) (SplitMix64 of base + stream * phi),
// so trial t of a Monte-Carlo run draws from derive_seed(seed, t) regardless
// of how trials are scheduled.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "orthosfm/geometry.hpp"

namespace orthosfm {

struct Scene {
  std::vector<LabeledPoint3> body;
  std::vector<RigidMotion> motions;  // one per frame; motions[0] is identity
  std::uint64_t seed = 0;
};

enum class NoiseDistribution { kUniform, kGaussian };

struct NoiseSpec {
  double level = 0.0;  // relative, 0.001 == 0.1%
  NoiseDistribution distribution = NoiseDistribution::kUniform;
  std::uint64_t seed = 0;
};

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

/// Label for the i-th traced point (0-based): P, Q, R, T, S, then X6, X7, ...
Label point_label(std::size_t i);

using PointSampler = std::function<Eigen::Vector3d(std::mt19937_64&)>;

/// n >= 3 points in the unit cube. Redraws until the first three points
/// span a triangle of area >= 0.02, all pairs are >= 0.05 apart and, for
/// n >= 4, the first four span a volume >= 0.005. `sampler` replaces the
/// uniform cube draw (test hook).
std::vector<LabeledPoint3> gen_body(std::size_t n, std::uint64_t seed,
                                    const PointSampler& sampler = {});

/// True for rotations that leave the viewing direction (nearly) unchanged:
/// rotation angle < 0.1 rad, or axis with in-plane component < 0.1.
bool is_degenerate_motion(const Eigen::Matrix3d& rotation);

/// Uniform rotation on SO(3) (Shoemake quaternion), translation uniform in
/// [-1, 1]^2, redrawn while is_degenerate_motion holds.
RigidMotion gen_motion(std::uint64_t seed);

/// Motions for `n_frames` frames: identity first, then random motions such
/// that no pair of frames is related by a degenerate relative rotation.
std::vector<RigidMotion> gen_motions(std::size_t n_frames, std::uint64_t seed);

Scene gen_scene(std::size_t n_points, std::size_t n_frames, std::uint64_t seed);
Scene make_scene(std::vector<LabeledPoint3> body, std::size_t n_frames, std::uint64_t seed);

/// Side lengths 2, 3 and sqrt(12.6878), the triangle used for the
/// three-point experiments.
inline constexpr TriangleDistances kReferenceTriangle{4.0, 9.0, 12.6878};

/// Triangle P, Q, R with the given squared side lengths, placed with a
/// random orientation around the origin.
std::vector<LabeledPoint3> body_from_triangle(const TriangleDistances& lengths,
                                              std::uint64_t seed);

/// Squared lengths of a body in the fixed edge order.
TriangleDistances true_triangle(const std::vector<LabeledPoint3>& body);
TetraDistances true_tetra(const std::vector<LabeledPoint3>& body);

std::vector<FrameObservation> render(const Scene& scene);

/// x -> x * (1 + eps) per coordinate; eps uniform in [-level, level] or
/// normal with sigma = level / 3.
std::vector<FrameObservation> add_noise(const std::vector<FrameObservation>& frames,
                                        const NoiseSpec& spec);

}  // namespace orthosfm
