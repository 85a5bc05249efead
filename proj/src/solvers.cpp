#include "orthosfm/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <limits>

#include "orthosfm/numeric.hpp"

namespace orthosfm {

QuadCoeffs3 quad_coeffs(const TriangleDistances& f) {
  return {2.0 * (-f.a_sq + f.b_sq + f.c_sq), 2.0 * (f.a_sq - f.b_sq + f.c_sq),
          2.0 * (f.a_sq + f.b_sq - f.c_sq), heron_form(f.a_sq, f.b_sq, f.c_sq)};
}

double heron_form(double x, double y, double z) {
  return x * x + y * y + z * z - 2.0 * x * y - 2.0 * x * z - 2.0 * y * z;
}

double eq1_residual(const TriangleDistances& l, const TriangleDistances& frame_sq) {
  const QuadCoeffs3 k = quad_coeffs(frame_sq);
  return heron_form(l.a_sq, l.b_sq, l.c_sq) + k.constant + k.coef_a * l.a_sq +
         k.coef_b * l.b_sq + k.coef_c * l.c_sq;
}

template <class D>
double Candidate<D>::max_residual() const {
  double m = 0.0;
  for (double r : residuals) m = std::max(m, std::abs(r));
  return m;
}

template <class D>
std::size_t RecoveryResult<D>::feasible_count() const {
  return static_cast<std::size_t>(
      std::count_if(candidates.begin(), candidates.end(), [](const auto& c) { return c.feasible; }));
}

template struct Candidate<TriangleDistances>;
template struct Candidate<TetraDistances>;
template struct RecoveryResult<TriangleDistances>;
template struct RecoveryResult<TetraDistances>;

namespace {

template <class D>
double observation_scale(std::span<const D> frames) {
  double s = 0.0;
  for (const auto& f : frames) s = std::max(s, f.max());
  return s;
}

template <class D>
void require_nonzero_scale(std::span<const D> frames) {
  const double s = observation_scale(frames);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorKind::kInvalidInput, "observations have zero or non-finite extent");
  }
}

std::vector<double> scaled_residuals(const TriangleDistances& cand,
                                     std::span<const TriangleDistances> frames) {
  const double s = std::max(observation_scale(frames), std::abs(cand.max()));
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(eq1_residual(cand, f) / (s * s));
  return out;
}

std::vector<double> scaled_residuals(const TetraDistances& cand,
                                     std::span<const TetraDistances> frames) {
  const double s = std::max(observation_scale(frames), std::abs(cand.max()));
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    double worst = 0.0;
    const std::array<std::pair<TriangleDistances, TriangleDistances>, 4> faces{{
        {cand.face_pqr(), f.face_pqr()},
        {cand.face_pqt(), f.face_pqt()},
        {cand.face_tqr(), f.face_tqr()},
        {cand.face_trp(), f.face_trp()},
    }};
    for (const auto& [c, o] : faces) worst = std::max(worst, std::abs(eq1_residual(c, o)));
    out.push_back(worst / (s * s));
  }
  return out;
}

template <class D>
Candidate<D> make_candidate(const D& lengths, std::span<const D> frames, double tol) {
  Candidate<D> c;
  c.lengths = lengths;
  c.residuals = scaled_residuals(lengths, frames);
  c.feasible = feasibility_check(lengths, frames, tol) && c.max_residual() <= tol;
  return c;
}

template <class D>
void sort_candidates(std::vector<Candidate<D>>& cs) {
  std::stable_sort(cs.begin(), cs.end(), [](const auto& l, const auto& r) {
    return l.max_residual() < r.max_residual();
  });
}

}  // namespace

LinearizedPair linearize(const TriangleDistances& frame1, const TriangleDistances& frame2,
                         const TriangleDistances& pivot, double /*tol*/) {
  const QuadCoeffs3 k1 = quad_coeffs(frame1);
  const QuadCoeffs3 k2 = quad_coeffs(frame2);
  const QuadCoeffs3 k3 = quad_coeffs(pivot);

  LinearizedPair l;
  l.d_a1 = k1.coef_a - k3.coef_a;
  l.d_b1 = k1.coef_b - k3.coef_b;
  l.d_c1 = k1.coef_c - k3.coef_c;
  l.d_cst1 = k1.constant - k3.constant;
  l.d_a2 = k2.coef_a - k3.coef_a;
  l.d_b2 = k2.coef_b - k3.coef_b;
  l.d_c2 = k2.coef_c - k3.coef_c;
  l.d_cst2 = k2.constant - k3.constant;
  l.denominator = l.d_a1 * l.d_b2 - l.d_a2 * l.d_b1;

  const double s = std::max({frame1.max(), frame2.max(), pivot.max()});
  const double row1 = std::hypot(l.d_a1, l.d_b1);
  const double row2 = std::hypot(l.d_a2, l.d_b2);
  const double den = std::abs(l.denominator);
  if (!(den > 1e-10 * s * s) || !(den > 1e-10 * row1 * row2)) {
    throw Error(ErrorKind::kDegenerate,
                "elimination denominator vanishes (collinear points or frames identical up to "
                "in-plane rotation)");
  }

  l.a_c = (-l.d_c1 * l.d_b2 + l.d_c2 * l.d_b1) / l.denominator;
  l.a_cst = (-l.d_cst1 * l.d_b2 + l.d_cst2 * l.d_b1) / l.denominator;
  l.b_c = (-l.d_a1 * l.d_c2 + l.d_a2 * l.d_c1) / l.denominator;
  l.b_cst = (-l.d_a1 * l.d_cst2 + l.d_a2 * l.d_cst1) / l.denominator;
  return l;
}

TriangleRecovery solve_p3f3(std::span<const TriangleDistances> frames, double tol) {
  if (frames.size() != 3) throw Error(ErrorKind::kInvalidInput, "p3f3 needs exactly 3 frames");
  require_nonzero_scale(frames);

  // All three pivots give the same |denominator| in exact arithmetic; keep
  // whichever is largest in floating point.
  std::optional<LinearizedPair> best;
  std::size_t pivot = 0;
  std::optional<Error> last_error;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t i = (k + 1) % 3, j = (k + 2) % 3;
    try {
      LinearizedPair l = linearize(frames[std::min(i, j)], frames[std::max(i, j)], frames[k], tol);
      if (!best || std::abs(l.denominator) > std::abs(best->denominator)) {
        best = l;
        pivot = k;
      }
    } catch (const Error& e) {
      last_error = e;
    }
  }
  if (!best) throw *last_error;
  const LinearizedPair& l = *best;

  // Substitute into the pivot frame's relation; quadratic in c².
  const QuadCoeffs3 k = quad_coeffs(frames[pivot]);
  const double ac = l.a_c, ak = l.a_cst, bc = l.b_c, bk = l.b_cst;
  const double q2 = ac * ac + bc * bc + 1.0 - 2.0 * ac * bc - 2.0 * ac - 2.0 * bc;
  const double q1 = 2.0 * ac * ak + 2.0 * bc * bk - 2.0 * (ac * bk + ak * bc) - 2.0 * ak -
                    2.0 * bk + k.coef_a * ac + k.coef_b * bc + k.coef_c;
  const double q0 = ak * ak + bk * bk - 2.0 * ak * bk + k.constant + k.coef_a * ak + k.coef_b * bk;

  const QuadraticRoots roots = solve_quadratic(q2, q1, q0, tol);
  if (roots.degenerate) {
    throw Error(ErrorKind::kDegenerate, "quadratic in c² vanishes identically");
  }

  TriangleRecovery out;
  out.measurement_inconsistent = roots.negative_discriminant;
  for (double c_sq : roots.roots) {
    const TriangleDistances cand{l.a_sq(c_sq), l.b_sq(c_sq), c_sq};
    out.candidates.push_back(make_candidate(cand, frames, tol));
  }
  sort_candidates(out.candidates);
  return out;
}

TriangleRecovery solve_p3f4(std::span<const TriangleDistances> frames, double tol) {
  if (frames.size() != 4) throw Error(ErrorKind::kInvalidInput, "p3f4 needs exactly 4 frames");
  require_nonzero_scale(frames);

  const QuadCoeffs3 k1 = quad_coeffs(frames[0]);
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  for (int r = 0; r < 3; ++r) {
    const QuadCoeffs3 ki = quad_coeffs(frames[r + 1]);
    a(r, 0) = ki.coef_a - k1.coef_a;
    a(r, 1) = ki.coef_b - k1.coef_b;
    a(r, 2) = ki.coef_c - k1.coef_c;
    b(r) = -(ki.constant - k1.constant);
  }
  const auto x = solve_pivoted(a, b);
  if (!x) throw Error(ErrorKind::kSingularSystem, "p3f4 system is singular (degenerate motion)");

  TriangleRecovery out;
  out.candidates.push_back(make_candidate(TriangleDistances{(*x)(0), (*x)(1), (*x)(2)}, frames, tol));
  return out;
}

TetraRecovery solve_p4f3(std::span<const TetraDistances> frames, double tol) {
  if (frames.size() != 3) throw Error(ErrorKind::kInvalidInput, "p4f3 needs exactly 3 frames");
  require_nonzero_scale(frames);

  // Unknown order a², b², c², d², f², g²; each face lists which unknowns
  // fill its (a, b, c) slots.
  struct Face {
    TriangleDistances (TetraDistances::*get)() const;
    std::array<int, 3> slots;
  };
  constexpr std::array<Face, 3> faces{{
      {&TetraDistances::face_pqt, {0, 5, 4}},
      {&TetraDistances::face_tqr, {3, 1, 5}},
      {&TetraDistances::face_trp, {3, 4, 2}},
  }};

  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> b;
  int row = 0;
  for (const Face& face : faces) {
    const QuadCoeffs3 k1 = quad_coeffs((frames[0].*face.get)());
    for (std::size_t i = 1; i < 3; ++i, ++row) {
      const QuadCoeffs3 ki = quad_coeffs((frames[i].*face.get)());
      a(row, face.slots[0]) = ki.coef_a - k1.coef_a;
      a(row, face.slots[1]) = ki.coef_b - k1.coef_b;
      a(row, face.slots[2]) = ki.coef_c - k1.coef_c;
      b(row) = -(ki.constant - k1.constant);
    }
  }
  const auto x = solve_pivoted(a, b);
  if (!x) throw Error(ErrorKind::kSingularSystem, "p4f3 system is singular");

  std::array<double, 6> v;
  for (int i = 0; i < 6; ++i) v[i] = (*x)(i);
  TetraRecovery out;
  out.candidates.push_back(make_candidate(TetraDistances::from_array(v), frames, tol));
  return out;
}

namespace {

template <class D>
bool feasible_impl(const D& candidate, std::span<const D> frames, double tol) {
  const double slack = tol * observation_scale(frames);
  const auto cand = candidate.as_array();
  for (double v : cand) {
    if (!std::isfinite(v) || v < -slack) return false;
  }
  for (const auto& f : frames) {
    const auto proj = f.as_array();
    for (std::size_t e = 0; e < cand.size(); ++e) {
      if (cand[e] < proj[e] - slack) return false;
    }
  }
  return true;
}

}  // namespace

bool feasibility_check(const TriangleDistances& candidate,
                       std::span<const TriangleDistances> frames, double tol) {
  return feasible_impl(candidate, frames, tol);
}

bool feasibility_check(const TetraDistances& candidate, std::span<const TetraDistances> frames,
                       double tol) {
  return feasible_impl(candidate, frames, tol);
}

}  // namespace orthosfm
