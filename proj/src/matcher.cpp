#include <algorithm>
#include <cmath>
#include <limits>

#include "orthosfm/two_frame.hpp"

namespace orthosfm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double triangle_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a, v = c - a;
  return 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
}

double hull_area4(const std::array<Eigen::Vector2d, 4>& p) {
  double best = 0.0;
  for (std::size_t skip = 0; skip < 4; ++skip) {
    std::array<std::size_t, 3> t{};
    for (std::size_t i = 0, k = 0; i < 4; ++i) {
      if (i != skip) t[k++] = i;
    }
    best = std::max(best, triangle_area(p[t[0]], p[t[1]], p[t[2]]));
  }
  // The three cyclic orders of a quadrilateral; the convex one is largest.
  static constexpr std::array<std::array<std::size_t, 4>, 3> kOrders{
      {{0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 1, 3}}};
  for (const auto& o : kOrders) {
    double twice = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& u = p[o[i]];
      const auto& v = p[o[(i + 1) % 4]];
      twice += u.x() * v.y() - u.y() * v.x();
    }
    best = std::max(best, 0.5 * std::abs(twice));
  }
  return best;
}

std::vector<Eigen::Vector2d> coords(const FrameObservation& f) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(f.size());
  for (const auto& lp : f.points()) out.push_back(lp.point.vec());
  return out;
}

void validate(const FrameObservation& frame1, const FrameObservation& frame2) {
  if (frame1.size() != frame2.size()) {
    throw Error(ErrorKind::kInvalidInput, "frames must hold the same number of points");
  }
  if (frame1.size() < 4) throw Error(ErrorKind::kInvalidInput, "matching needs at least 4 points");
}

std::vector<Assignment> enumerate_assignments(std::size_t n) {
  std::vector<Assignment> out;
  out.reserve(n * (n - 1) * (n - 2) * (n - 3));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        for (std::size_t l = 0; l < n; ++l) {
          if (l == i || l == j || l == k) continue;
          out.push_back(Assignment{{i, j, k, l}});
        }
      }
    }
  return out;
}

std::optional<FourPointFit> fit_assignment(const std::vector<Eigen::Vector2d>& x1,
                                           const std::vector<Eigen::Vector2d>& x2,
                                           const std::array<std::size_t, 4>& probes,
                                           const Assignment& a, double tol) {
  Quad2 q1, q2;
  for (std::size_t i = 0; i < 4; ++i) {
    q1[i] = x1[probes[i]];
    q2[i] = x2[a.targets[i]];
  }
  try {
    return fit_four_points(q1, q2, tol);
  } catch (const Error&) {
    return std::nullopt;
  }
}

double score_assignment(const std::vector<Eigen::Vector2d>& x1,
                        const std::vector<Eigen::Vector2d>& x2,
                        const std::array<std::size_t, 4>& probes, const Assignment& a, double tol) {
  const auto fit = fit_assignment(x1, x2, probes, a, tol);
  return fit ? fit->score.residual : kInf;
}

// Shared tail of both matchers: rank, extend greedily, decide.
MatchReport finish(const FrameObservation& frame1, const FrameObservation& frame2,
                   const MatchOptions& options, const std::array<std::size_t, 4>& probes,
                   std::vector<ScoredAssignment> ranking) {
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& l, const auto& r) {
    if (l.residual != r.residual) return l.residual < r.residual;
    return l.assignment < r.assignment;
  });

  MatchReport report;
  report.probes = probes;
  std::array<FrameObservation, 2> frames{frame1, frame2};
  report.threshold = options.threshold * std::sqrt(squared_diameter(frames));
  report.ranking = std::move(ranking);

  const std::size_t n = frame1.size();
  const ScoredAssignment& best = report.ranking.front();
  report.best_residual = best.residual;
  report.margin = report.ranking.size() > 1 ? report.ranking[1].residual - best.residual : kInf;
  report.consistent = best.residual <= report.threshold;
  if (!std::isfinite(best.residual)) return report;

  const auto x1 = coords(frame1);
  const auto x2 = coords(frame2);
  report.bijection.assign(n, n);
  report.point_residuals.assign(n, 0.0);
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < 4; ++i) {
    report.bijection[probes[i]] = best.assignment.targets[i];
    used[best.assignment.targets[i]] = true;
  }
  report.point_residuals[probes[3]] = best.residual;
  if (n == 4) return report;

  const auto fit = fit_assignment(x1, x2, probes, best.assignment, options.tol);
  if (!fit || !fit->transfer) return report;
  std::vector<std::size_t> rest1;
  for (std::size_t i = 0; i < n; ++i) {
    if (report.bijection[i] == n) rest1.push_back(i);
  }
  std::vector<Line2> lines;
  for (std::size_t i : rest1) {
    try {
      lines.push_back(fit->transfer->transfer_ray(x1[i]));
    } catch (const Error&) {
      // Ray parallel to the probe plane: no prediction for this point.
      lines.push_back(Line2{Eigen::Vector2d::Constant(kInf), Eigen::Vector2d::Zero(), true});
    }
  }

  // Global greedy: repeatedly commit the closest (point, line) pair.
  std::vector<bool> done(rest1.size(), false);
  for (std::size_t round = 0; round < rest1.size(); ++round) {
    double best_d = kInf;
    std::size_t bi = 0, bj = 0;
    for (std::size_t r = 0; r < rest1.size(); ++r) {
      if (done[r]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double d = lines[r].distance(x2[j]);
        if (d < best_d || best_d == kInf) {
          best_d = d;
          bi = r;
          bj = j;
        }
      }
    }
    done[bi] = true;
    used[bj] = true;
    report.bijection[rest1[bi]] = bj;
    report.point_residuals[rest1[bi]] = best_d;
  }
  return report;
}

}  // namespace

std::array<std::size_t, 4> select_probes(const FrameObservation& frame1) {
  const auto x = coords(frame1);
  const std::size_t n = x.size();
  if (n < 4) throw Error(ErrorKind::kInvalidInput, "probe selection needs 4 points");
  std::array<std::size_t, 4> best{0, 1, 2, 3};
  double best_area = -1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
          const double area = hull_area4({x[i], x[j], x[k], x[l]});
          if (area > best_area) {
            best_area = area;
            best = {i, j, k, l};
          }
        }
  // Put the largest triangle first; the leftover point is T.
  std::size_t t_slot = 3;
  double tri_best = -1.0;
  for (std::size_t skip = 0; skip < 4; ++skip) {
    std::array<std::size_t, 3> t{};
    for (std::size_t i = 0, m = 0; i < 4; ++i) {
      if (i != skip) t[m++] = best[i];
    }
    const double a = triangle_area(x[t[0]], x[t[1]], x[t[2]]);
    if (a > tri_best) {
      tri_best = a;
      t_slot = skip;
    }
  }
  std::array<std::size_t, 4> ordered{};
  for (std::size_t i = 0, m = 0; i < 4; ++i) {
    if (i != t_slot) ordered[m++] = best[i];
  }
  ordered[3] = best[t_slot];
  return ordered;
}

MatchReport match_points(const FrameObservation& frame1, const FrameObservation& frame2,
                         const MatchOptions& options) {
  validate(frame1, frame2);
  const auto probes = select_probes(frame1);
  const auto x1 = coords(frame1);
  const auto x2 = coords(frame2);
  const auto assignments = enumerate_assignments(frame1.size());

  std::vector<ScoredAssignment> ranking(assignments.size());
  const auto count = static_cast<std::ptrdiff_t>(assignments.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    ranking[i] = {assignments[i], score_assignment(x1, x2, probes, assignments[i], options.tol)};
  }
  return finish(frame1, frame2, options, probes, std::move(ranking));
}

namespace reference {

MatchReport match_points(const FrameObservation& frame1, const FrameObservation& frame2,
                         const MatchOptions& options) {
  validate(frame1, frame2);
  const auto probes = select_probes(frame1);
  const auto x1 = coords(frame1);
  const auto x2 = coords(frame2);
  std::vector<ScoredAssignment> ranking;
  for (const Assignment& a : enumerate_assignments(frame1.size())) {
    ranking.push_back({a, score_assignment(x1, x2, probes, a, options.tol)});
  }
  return finish(frame1, frame2, options, probes, std::move(ranking));
}

}  // namespace reference

}  // namespace orthosfm
