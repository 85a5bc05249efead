#pragma once

// Monte-Carlo error analysis of the length solvers under coordinate noise.
//
// Trial t draws its scene from derive_seed(seed, t) and is shared by all
// levels, so levels differ only in the noise. Triangle modes pose the fixed
// triangle (4, 9, 12.6878) randomly; the tetrahedron mode uses a random
// body. The per-trial error is the largest relative error over the squared
// lengths. For p3f3 the candidate closest to the truth is scored, which
// measures the solver rather than candidate selection.

#include <cstdint>
#include <string>
#include <vector>

#include "orthosfm/scene_sim.hpp"

namespace orthosfm {

enum class SolverMode { kP3F3, kP3F4, kP4F3 };

const char* to_string(SolverMode mode);
/// Throws kInvalidInput for anything but "p3f3", "p3f4", "p4f3".
SolverMode parse_solver_mode(const std::string& name);

struct NoiseStudyConfig {
  SolverMode mode = SolverMode::kP3F4;
  std::vector<double> levels{0.001, 0.01, 0.1};
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  NoiseDistribution distribution = NoiseDistribution::kUniform;
};

/// Failed trials (singular system, no real root) count as infinite error:
/// they raise the median and p95 but are left out of the mean.
struct NoiseStudyRow {
  double level = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double median = 0.0;
  double mean = 0.0;
  double p95 = 0.0;
};

/// Error of one trial; +infinity when the solver returns nothing.
double noise_trial_error(SolverMode mode, double level, NoiseDistribution distribution,
                         std::uint64_t seed, std::size_t trial, std::size_t level_index);

std::vector<NoiseStudyRow> run_noise_study(const NoiseStudyConfig& config);

std::string noise_study_csv(const std::vector<NoiseStudyRow>& rows);

namespace reference {
std::vector<NoiseStudyRow> run_noise_study(const NoiseStudyConfig& config);
}  // namespace reference

}  // namespace orthosfm
