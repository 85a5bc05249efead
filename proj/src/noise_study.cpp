#include "orthosfm/noise_study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "orthosfm/io.hpp"
#include "orthosfm/solvers.hpp"

namespace orthosfm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Distances>
double relative_error(const Distances& got, const Distances& truth) {
  const auto g = got.as_array();
  const auto t = truth.as_array();
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    worst = std::max(worst, std::abs(g[i] - t[i]) / t[i]);
  }
  return worst;
}

std::vector<TriangleDistances> triangle_frames(const std::vector<FrameObservation>& frames) {
  const std::vector<Label> labels{"P", "Q", "R"};
  std::vector<TriangleDistances> out;
  for (const auto& f : frames) out.push_back(triangle_sq(f, labels));
  return out;
}

void check(const NoiseStudyConfig& config) {
  if (config.trials < 1) throw Error(ErrorKind::kInvalidInput, "trials must be >= 1");
  for (double level : config.levels) {
    if (!(level >= 0.0) || !std::isfinite(level)) {
      throw Error(ErrorKind::kInvalidInput, "noise levels must be finite and >= 0");
    }
  }
}

NoiseStudyRow summarize(double level, std::vector<double> errors) {
  NoiseStudyRow row;
  row.level = level;
  row.trials = errors.size();
  std::sort(errors.begin(), errors.end());
  const auto finite_end = std::find_if(errors.begin(), errors.end(),
                                       [](double e) { return !std::isfinite(e); });
  row.failures = static_cast<std::size_t>(errors.end() - finite_end);
  const std::size_t n = errors.size();
  row.median = n % 2 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  row.p95 = errors[std::max<std::size_t>(rank, 1) - 1];
  const auto ok = static_cast<std::size_t>(finite_end - errors.begin());
  row.mean = ok ? std::accumulate(errors.begin(), finite_end, 0.0) / static_cast<double>(ok) : kInf;
  return row;
}

}  // namespace

const char* to_string(SolverMode mode) {
  switch (mode) {
    case SolverMode::kP3F3: return "p3f3";
    case SolverMode::kP3F4: return "p3f4";
    case SolverMode::kP4F3: return "p4f3";
  }
  return "?";
}

SolverMode parse_solver_mode(const std::string& name) {
  if (name == "p3f3") return SolverMode::kP3F3;
  if (name == "p3f4") return SolverMode::kP3F4;
  if (name == "p4f3") return SolverMode::kP4F3;
  throw Error(ErrorKind::kInvalidInput, "unknown solver mode '" + name + "'");
}

double noise_trial_error(SolverMode mode, double level, NoiseDistribution distribution,
                         std::uint64_t seed, std::size_t trial, std::size_t level_index) {
  const std::uint64_t scene_seed = derive_seed(seed, trial);
  const NoiseSpec noise{level, distribution, derive_seed(scene_seed, 16 + level_index)};
  try {
    if (mode == SolverMode::kP4F3) {
      const Scene scene = gen_scene(4, 3, scene_seed);
      const auto frames = add_noise(render(scene), noise);
      const std::vector<Label> labels{"P", "Q", "R", "T"};
      std::vector<TetraDistances> sq;
      for (const auto& f : frames) sq.push_back(tetra_sq(f, labels));
      const auto result = solve_p4f3(sq);
      if (result.candidates.empty()) return kInf;
      return relative_error(result.candidates.front().lengths, true_tetra(scene.body));
    }
    const std::size_t n_frames = mode == SolverMode::kP3F4 ? 4 : 3;
    const Scene scene =
        make_scene(body_from_triangle(kReferenceTriangle, derive_seed(scene_seed, 0)), n_frames,
                   scene_seed);
    const auto sq = triangle_frames(add_noise(render(scene), noise));
    const TriangleDistances truth = true_triangle(scene.body);
    const auto result = mode == SolverMode::kP3F4 ? solve_p3f4(sq) : solve_p3f3(sq);
    double best = kInf;
    for (const auto& c : result.candidates) best = std::min(best, relative_error(c.lengths, truth));
    return best;
  } catch (const Error&) {
    return kInf;
  }
}

std::vector<NoiseStudyRow> run_noise_study(const NoiseStudyConfig& config) {
  check(config);
  const std::size_t n_levels = config.levels.size();
  const auto total = static_cast<std::ptrdiff_t>(n_levels * config.trials);
  std::vector<double> errors(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const std::size_t li = static_cast<std::size_t>(k) / config.trials;
    const std::size_t t = static_cast<std::size_t>(k) % config.trials;
    errors[k] = noise_trial_error(config.mode, config.levels[li], config.distribution, config.seed,
                                  t, li);
  }
  std::vector<NoiseStudyRow> rows;
  for (std::size_t li = 0; li < n_levels; ++li) {
    const auto first = errors.begin() + static_cast<std::ptrdiff_t>(li * config.trials);
    rows.push_back(summarize(config.levels[li],
                             {first, first + static_cast<std::ptrdiff_t>(config.trials)}));
  }
  return rows;
}

namespace reference {

std::vector<NoiseStudyRow> run_noise_study(const NoiseStudyConfig& config) {
  check(config);
  std::vector<NoiseStudyRow> rows;
  for (std::size_t li = 0; li < config.levels.size(); ++li) {
    std::vector<double> errors;
    for (std::size_t t = 0; t < config.trials; ++t) {
      errors.push_back(noise_trial_error(config.mode, config.levels[li], config.distribution,
                                         config.seed, t, li));
    }
    rows.push_back(summarize(config.levels[li], std::move(errors)));
  }
  return rows;
}

}  // namespace reference

std::string noise_study_csv(const std::vector<NoiseStudyRow>& rows) {
  std::string out = "level,trials,failures,median,mean,p95\n";
  for (const auto& r : rows) {
    out += format_number(r.level) + "," + std::to_string(r.trials) + "," +
           std::to_string(r.failures) + "," + format_number(r.median) + "," +
           format_number(r.mean) + "," + format_number(r.p95) + "\n";
  }
  return out;
}

}  // namespace orthosfm
