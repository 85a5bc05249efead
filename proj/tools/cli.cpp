#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <ostream>
#include <random>

#include "orthosfm/io.hpp"
#include "orthosfm/noise_study.hpp"
#include "orthosfm/solvers.hpp"
#include "orthosfm/two_frame.hpp"

namespace orthosfm::cli {

namespace {

struct SeedChoice {
  std::uint64_t value = 0;
  std::string source;
};

SeedChoice resolve_seed(const CLI::Option* flag, std::uint64_t flag_value) {
  if (flag->count() > 0) return {flag_value, "flag"};
  if (const char* env = std::getenv("ORTHOSFM_SEED"); env && *env) {
    const std::string_view text(env);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(ErrorKind::kInvalidInput, "ORTHOSFM_SEED is not an unsigned integer");
    }
    return {v, "env"};
  }
  return {0, "default"};
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kLabelAbsent:
    case ErrorKind::kParse:
      return kExitInputError;
    case ErrorKind::kInconsistentLengths:
      return kExitNoSolution;
    case ErrorKind::kDegenerate:
    case ErrorKind::kSingularSystem:
      return kExitDegenerate;
  }
  return kExitInputError;
}

NoiseDistribution parse_distribution(const std::string& name) {
  if (name == "uniform") return NoiseDistribution::kUniform;
  if (name == "gaussian") return NoiseDistribution::kGaussian;
  throw Error(ErrorKind::kInvalidInput, "unknown distribution '" + name + "'");
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::vector<FrameObservation> load_frames(const std::string& path) {
  return read_frames(read_text_file(path));
}

// ---- recover ---------------------------------------------------------------

struct RecoverArgs {
  std::string input;
  std::string mode = "auto";
  double tol = kDefaultTolerance;
};

std::string pick_mode(std::size_t points, std::size_t frames) {
  if (points >= 4 && frames >= 3) return "p4f3";
  if (points >= 3 && frames >= 4) return "p3f4";
  if (points >= 3 && frames == 3) return "p3f3";
  throw Error(ErrorKind::kInvalidInput, "need at least 3 points in 3 frames, got " +
                                            std::to_string(points) + " points in " +
                                            std::to_string(frames) + " frames");
}

int cmd_recover(const RecoverArgs& args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const auto frames = load_frames(args.input);
  const auto all_labels = frames.front().labels();
  const std::string mode =
      args.mode == "auto" ? pick_mode(all_labels.size(), frames.size()) : args.mode;
  const SolverMode solver = parse_solver_mode(mode);
  const std::size_t need_points = solver == SolverMode::kP4F3 ? 4 : 3;
  const std::size_t need_frames = solver == SolverMode::kP3F4 ? 4 : 3;
  if (all_labels.size() < need_points || frames.size() < need_frames) {
    throw Error(ErrorKind::kInvalidInput, mode + " needs " + std::to_string(need_points) +
                                              " points in " + std::to_string(need_frames) +
                                              " frames");
  }
  const std::vector<Label> labels(all_labels.begin(),
                                  all_labels.begin() + static_cast<std::ptrdiff_t>(need_points));

  Json report;
  report["command"] = "recover";
  report["input"] = args.input;
  report["solver"] = mode;
  report["points"] = labels;
  report["frames_used"] = need_frames;
  report["dof"] = dof_json(dof_balance(static_cast<long long>(need_points),
                                       static_cast<long long>(need_frames)));
  report["tol"] = args.tol;

  int code = kExitOk;
  try {
    std::size_t feasible = 0;
    if (solver == SolverMode::kP4F3) {
      std::vector<TetraDistances> sq;
      for (std::size_t f = 0; f < need_frames; ++f) sq.push_back(tetra_sq(frames[f], labels));
      const auto result = solve_p4f3(sq, args.tol);
      report["candidates"] = recovery_json(result);
      report["measurement_inconsistent"] = result.measurement_inconsistent;
      feasible = result.feasible_count();
    } else {
      std::vector<TriangleDistances> sq;
      for (std::size_t f = 0; f < need_frames; ++f) sq.push_back(triangle_sq(frames[f], labels));
      const auto result =
          solver == SolverMode::kP3F4 ? solve_p3f4(sq, args.tol) : solve_p3f3(sq, args.tol);
      report["candidates"] = recovery_json(result);
      report["measurement_inconsistent"] = result.measurement_inconsistent;
      feasible = result.feasible_count();
    }
    report["status"] = feasible > 0 ? "ok" : "no_solution";
    code = feasible > 0 ? kExitOk : kExitNoSolution;
  } catch (const Error& e) {
    if (exit_code_for(e.kind()) != kExitDegenerate) throw;
    report["candidates"] = Json::array();
    report["status"] = "degenerate";
    report["reason"] = e.what();
    err << "degenerate: " << e.what() << "\n";
    code = kExitDegenerate;
  }
  report["timing_ms"] = elapsed_ms(start);
  out << report.dump(2) << "\n";
  return code;
}

// ---- match -----------------------------------------------------------------

struct MatchArgs {
  std::string input;
  bool unlabeled = false;
  double threshold = MatchOptions{}.threshold;
  double tol = kDefaultTolerance;
};

FrameObservation subset(const FrameObservation& frame, const std::vector<Label>& labels) {
  std::vector<LabeledPoint2> pts;
  for (const auto& l : labels) pts.push_back({l, frame.at(l)});
  return FrameObservation(std::move(pts));
}

int cmd_match(const MatchArgs& args, std::ostream& out, std::ostream&) {
  const auto start = std::chrono::steady_clock::now();
  const auto frames = load_frames(args.input);
  if (frames.size() != 2) {
    throw Error(ErrorKind::kInvalidInput,
                "match needs exactly 2 frames, got " + std::to_string(frames.size()));
  }
  if (!(args.threshold >= 0.0)) throw Error(ErrorKind::kInvalidInput, "threshold must be >= 0");
  const auto& f1 = frames[0];
  const auto& f2 = frames[1];
  const MatchOptions options{args.threshold, args.tol};
  const MatchReport m = match_points(f1, f2, options);

  Json report;
  report["command"] = "match";
  report["input"] = args.input;
  report["labeled"] = !args.unlabeled;
  Json probes = Json::array();
  for (std::size_t i : m.probes) probes.push_back(f1[i].label);
  report["probes"] = probes;
  report["assignments_scored"] = m.assignments_scored();
  report["best_residual"] = m.best_residual;
  report["margin"] = m.margin;
  report["threshold"] = m.threshold;
  report["consistent"] = m.consistent;
  Json bijection = Json::array();
  for (std::size_t i = 0; i < m.bijection.size(); ++i) {
    bijection.push_back({{"frame1", f1[i].label},
                         {"frame2_index", m.bijection[i]},
                         {"frame2", f2[m.bijection[i]].label},
                         {"residual", m.point_residuals[i]}});
  }
  report["bijection"] = bijection;
  Json ranking = Json::array();
  for (const auto& s : m.ranking) {
    ranking.push_back({{"targets", s.assignment.targets}, {"residual", s.residual}});
  }
  report["ranking"] = ranking;

  bool ok = m.consistent;
  if (!args.unlabeled) {
    // Labels given: test P, Q, R against every further point.
    const auto labels = f1.labels();
    const FrameObservation g2 = subset(f2, labels);
    Json per_point = Json::array();
    double worst = 0.0;
    for (std::size_t i = 3; i < labels.size(); ++i) {
      const std::vector<Label> quad{labels[0], labels[1], labels[2], labels[i]};
      const double score = rigidity_score(subset(f1, quad), subset(g2, quad), args.tol);
      worst = std::max(worst, score);
      per_point.push_back({{"label", labels[i]}, {"residual", score}});
    }
    const bool rigid = worst <= m.threshold;
    report["rigidity"] = {{"verdict", rigid ? "consistent" : "inconsistent"},
                          {"max_residual", worst},
                          {"points", per_point}};
    ok = rigid;
  }
  report["status"] = ok ? "ok" : "no_consistent_assignment";
  report["timing_ms"] = elapsed_ms(start);
  out << report.dump(2) << "\n";
  return ok ? kExitOk : kExitNoSolution;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::size_t points = 3;
  std::size_t frames = 4;
  double noise = 0.0;
  std::string distribution = "uniform";
  std::string out;
  std::string body = "random";
  bool shuffle = false;
};

void shuffle_points(std::vector<FrameObservation>& frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t f = 1; f < frames.size(); ++f) {
    std::vector<LabeledPoint2> pts = frames[f].points();
    for (std::size_t i = pts.size(); i > 1; --i) {
      std::swap(pts[i - 1], pts[rng() % i]);
    }
    frames[f] = FrameObservation(std::move(pts));
  }
}

int cmd_simulate(const SimulateArgs& args, const SeedChoice& seed, std::ostream& out) {
  if (args.points < 3) throw Error(ErrorKind::kInvalidInput, "--points must be >= 3");
  if (args.frames < 2) throw Error(ErrorKind::kInvalidInput, "--frames must be >= 2");
  if (!(args.noise >= 0.0)) throw Error(ErrorKind::kInvalidInput, "--noise must be >= 0");
  Scene scene;
  if (args.body == "reference-triangle") {
    if (args.points != 3) {
      throw Error(ErrorKind::kInvalidInput, "--body reference-triangle has exactly 3 points");
    }
    scene = make_scene(body_from_triangle(kReferenceTriangle, derive_seed(seed.value, 0)),
                       args.frames, seed.value);
  } else if (args.body == "random") {
    scene = gen_scene(args.points, args.frames, seed.value);
  } else {
    throw Error(ErrorKind::kInvalidInput, "unknown --body '" + args.body + "'");
  }
  auto frames = add_noise(render(scene), NoiseSpec{args.noise, parse_distribution(args.distribution),
                                                   derive_seed(seed.value, 2)});
  if (args.shuffle) shuffle_points(frames, derive_seed(seed.value, 3));

  const std::string csv = write_frames(frames);
  if (args.out.empty()) {
    out << csv;
    return kExitOk;
  }
  const std::string scene_path = args.out + ".scene.json";
  const std::string frames_path = args.out + ".frames.csv";
  write_text_file(scene_path, write_scene(scene));
  write_text_file(frames_path, csv);
  Json summary{{"command", "simulate"},  {"seed", seed.value},
               {"seed_source", seed.source}, {"points", args.points},
               {"frames", args.frames},     {"noise", args.noise},
               {"distribution", args.distribution}, {"shuffled", args.shuffle},
               {"scene_file", scene_path},  {"frames_file", frames_path}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

// ---- noise-study -----------------------------------------------------------

struct NoiseArgs {
  std::string mode = "p3f4";
  std::vector<double> levels{0.001, 0.01, 0.1};
  std::size_t trials = 1000;
  std::string distribution = "uniform";
  std::string out;
};

int cmd_noise_study(const NoiseArgs& args, const SeedChoice& seed, std::ostream& out) {
  NoiseStudyConfig config;
  config.mode = parse_solver_mode(args.mode);
  config.levels = args.levels;
  config.trials = args.trials;
  config.seed = seed.value;
  config.distribution = parse_distribution(args.distribution);
  const std::string csv = noise_study_csv(run_noise_study(config));
  if (!args.out.empty()) write_text_file(args.out, csv);
  out << csv;
  return kExitOk;
}

// ---- ambiguity -------------------------------------------------------------

struct AmbiguityArgs {
  std::string input;
  std::string scene;
  std::vector<double> angles{-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6};
  std::string out;
  double tol = kDefaultTolerance;
};

int cmd_ambiguity(const AmbiguityArgs& args, std::ostream& out) {
  std::vector<FrameObservation> frames;
  std::optional<TwoFrameInterpretation> base;
  if (!args.scene.empty()) {
    const Scene scene = read_scene(read_text_file(args.scene));
    if (scene.motions.size() < 2) throw Error(ErrorKind::kInvalidInput, "scene has one frame");
    base = TwoFrameInterpretation{scene.body, scene.motions[1]};
    frames = args.input.empty() ? render(scene) : load_frames(args.input);
  } else {
    if (args.input.empty()) throw Error(ErrorKind::kInvalidInput, "give a frames file or --scene");
    frames = load_frames(args.input);
  }
  if (frames.size() < 2 || (args.scene.empty() && frames.size() != 2)) {
    throw Error(ErrorKind::kInvalidInput, "ambiguity needs exactly 2 frames");
  }
  if (!base) base = interpret_two_frames(frames[0], frames[1], args.tol);

  const auto family = ambiguity_family(frames[0], frames[1], *base, args.angles, args.tol);
  std::string csv = "angle,status,reprojection1,reprojection2,max_displacement";
  for (const auto& lp : base->points) csv += "," + lp.label + "_x," + lp.label + "_y," + lp.label + "_z";
  csv += "\n";
  for (const auto& m : family) {
    csv += format_number(m.angle);
    if (m.parallel_rays) {
      csv += ",skipped,,,";
      for (std::size_t i = 0; i < base->points.size(); ++i) csv += ",,,";
      csv += "\n";
      continue;
    }
    csv += ",ok," + format_number(m.reprojection1) + "," + format_number(m.reprojection2) + "," +
           format_number(m.max_displacement);
    for (const auto& lp : m.points) {
      csv += "," + format_number(lp.point.x) + "," + format_number(lp.point.y) + "," +
             format_number(lp.point.z);
    }
    csv += "\n";
  }
  if (!args.out.empty()) write_text_file(args.out, csv);
  out << csv;
  return kExitOk;
}

// ---- dof -------------------------------------------------------------------

int cmd_dof(long long points, long long frames, std::ostream& out) {
  const DofBalance d = dof_balance(points, frames);
  Json report{{"command", "dof"}, {"points", points}, {"frames", frames}};
  report.update(dof_json(d));
  out << report.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rigid point-body structure from orthographic frames"};
  app.require_subcommand(1);

  RecoverArgs recover;
  auto* sub_recover = app.add_subcommand("recover", "Recover squared body lengths from a frames file");
  sub_recover->add_option("frames_file", recover.input, "Frames CSV")->required();
  sub_recover->add_option("--mode", recover.mode, "p3f3, p3f4, p4f3 or auto")
      ->check(CLI::IsMember({"auto", "p3f3", "p3f4", "p4f3"}));
  sub_recover->add_option("--tol", recover.tol, "Relative tolerance");

  MatchArgs match;
  auto* sub_match = app.add_subcommand("match", "Find correspondences between two frames");
  sub_match->add_option("frames_file", match.input, "Frames CSV with two frames")->required();
  sub_match->add_flag("--unlabeled", match.unlabeled, "Ignore labels; report correspondence only");
  sub_match->add_option("--threshold", match.threshold,
                        "Rigidity threshold relative to the observation diameter");
  sub_match->add_option("--tol", match.tol, "Relative tolerance");

  SimulateArgs simulate;
  std::uint64_t sim_seed = 0;
  auto* sub_simulate = app.add_subcommand("simulate", "Generate a random scene and its frames");
  sub_simulate->add_option("--points", simulate.points, "Number of points");
  sub_simulate->add_option("--frames", simulate.frames, "Number of frames");
  sub_simulate->add_option("--noise", simulate.noise, "Relative coordinate noise level");
  sub_simulate->add_option("--distribution", simulate.distribution, "uniform or gaussian");
  auto* sim_seed_opt = sub_simulate->add_option("--seed", sim_seed, "Random seed");
  sub_simulate->add_option("--out", simulate.out,
                           "Output prefix; writes <prefix>.scene.json and <prefix>.frames.csv");
  sub_simulate->add_option("--body", simulate.body, "random or reference-triangle");
  sub_simulate->add_flag("--shuffle", simulate.shuffle, "Shuffle point order in later frames");

  NoiseArgs noise;
  std::uint64_t noise_seed = 0;
  auto* sub_noise = app.add_subcommand("noise-study", "Monte-Carlo error statistics per noise level");
  sub_noise->add_option("--mode", noise.mode, "p3f3, p3f4 or p4f3");
  sub_noise->add_option("--levels", noise.levels, "Comma-separated noise levels")->delimiter(',');
  sub_noise->add_option("--trials", noise.trials, "Trials per level")->check(CLI::PositiveNumber);
  sub_noise->add_option("--distribution", noise.distribution, "uniform or gaussian");
  auto* noise_seed_opt = sub_noise->add_option("--seed", noise_seed, "Random seed");
  sub_noise->add_option("--out", noise.out, "Also write the CSV here");

  AmbiguityArgs ambiguity;
  auto* sub_ambiguity =
      app.add_subcommand("ambiguity", "Structures consistent with the same two frames");
  sub_ambiguity->add_option("frames_file", ambiguity.input, "Frames CSV with two frames");
  sub_ambiguity->add_option("--scene", ambiguity.scene, "Scene JSON giving the base structure");
  sub_ambiguity->add_option("--angles", ambiguity.angles, "Comma-separated angles in radians")
      ->delimiter(',');
  sub_ambiguity->add_option("--out", ambiguity.out, "Also write the CSV here");
  sub_ambiguity->add_option("--tol", ambiguity.tol, "Relative tolerance");

  long long dof_points = 0, dof_frames = 0;
  auto* sub_dof = app.add_subcommand("dof", "Unknowns versus measurements");
  sub_dof->add_option("--points", dof_points, "Number of points")->required();
  sub_dof->add_option("--frames", dof_frames, "Number of frames")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*sub_recover) return cmd_recover(recover, out, err);
    if (*sub_match) return cmd_match(match, out, err);
    if (*sub_simulate) return cmd_simulate(simulate, resolve_seed(sim_seed_opt, sim_seed), out);
    if (*sub_noise) return cmd_noise_study(noise, resolve_seed(noise_seed_opt, noise_seed), out);
    if (*sub_ambiguity) return cmd_ambiguity(ambiguity, out);
    if (*sub_dof) return cmd_dof(dof_points, dof_frames, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace orthosfm::cli
