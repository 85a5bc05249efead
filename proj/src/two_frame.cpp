#include "orthosfm/two_frame.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "orthosfm/numeric.hpp"
#include "orthosfm/solvers.hpp"

namespace orthosfm {

double BofCCoeffs::evaluate(double b_sq, double c_sq) const {
  return b_sq * b_sq * f_b2 + b_sq * (c_sq * f_cb + f_b) + (c_sq * f_c + c_sq * c_sq * f_c2 + f_cst);
}

double BofCCoeffs::discriminant(double c_sq) const {
  const double lin = c_sq * f_cb + f_b;
  return lin * lin - 4.0 * f_b2 * (c_sq * f_c + c_sq * c_sq * f_c2 + f_cst);
}

BofCCoeffs b_of_c_coeffs(const TriangleDistances& frame1, const TriangleDistances& frame2,
                         double /*tol*/) {
  const QuadCoeffs3 k1 = quad_coeffs(frame1);
  const QuadCoeffs3 k2 = quad_coeffs(frame2);

  // Subtracting the two relations leaves one linear in a²:
  //   a² = p b² + q c² + r.
  const double delta_a = k1.coef_a - k2.coef_a;
  const double scale = std::max(frame1.max(), frame2.max());
  if (!(std::abs(delta_a) > 1e-10 * scale)) {
    throw Error(ErrorKind::kDegenerate, "a²-coefficients of the two frames coincide");
  }
  const double p = (k2.coef_b - k1.coef_b) / delta_a;
  const double q = (k2.coef_c - k1.coef_c) / delta_a;
  const double r = (k2.constant - k1.constant) / delta_a;

  // Substituted back into frame 1's relation.
  BofCCoeffs c;
  c.f_b2 = (1.0 - p) * (1.0 - p);
  c.f_c2 = (1.0 - q) * (1.0 - q);
  c.f_cb = 2.0 * (p * q - q - p - 1.0);
  c.f_b = p * k1.coef_a + k1.coef_b - 2.0 * r + 2.0 * r * p;
  c.f_c = q * k1.coef_a + k1.coef_c - 2.0 * r + 2.0 * r * q;
  c.f_cst = r * r + r * k1.coef_a + k1.constant;
  c.a_per_b = p;
  c.a_per_c = q;
  c.a_cst = r;
  return c;
}

std::vector<double> solve_b_given_c(const BofCCoeffs& coeffs, double c_sq, double tol) {
  const QuadraticRoots roots =
      solve_quadratic(coeffs.f_b2, c_sq * coeffs.f_cb + coeffs.f_b,
                      c_sq * coeffs.f_c + c_sq * c_sq * coeffs.f_c2 + coeffs.f_cst, tol);
  std::vector<double> out;
  for (double b_sq : roots.roots) {
    if (b_sq >= 0.0) out.push_back(b_sq);
  }
  return out;
}

double Line2::distance(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d v = p - origin;
  if (degenerate) return v.norm();
  return std::abs(direction.x() * v.y() - direction.y() * v.x()) / direction.norm();
}

std::optional<TriangleTransfer> TriangleTransfer::build(
    const std::array<Eigen::Vector2d, 3>& frame1, const std::array<Eigen::Vector2d, 3>& frame2,
    double a_sq, double b_sq, double c_sq, double tol) {
  double scale = std::max({a_sq, b_sq, c_sq});
  for (const auto* f : {&frame1, &frame2}) {
    scale = std::max({scale, ((*f)[0] - (*f)[1]).squaredNorm(), ((*f)[1] - (*f)[2]).squaredNorm(),
                      ((*f)[2] - (*f)[0]).squaredNorm()});
  }
  const double sq_slack = tol * scale;
  const double closure_slack = std::sqrt(tol) * scale;

  // Edge vectors RP, RQ lifted to 3D with R at depth 0 and z_P >= 0.
  const auto lift = [&](const std::array<Eigen::Vector2d, 3>& f)
      -> std::optional<std::array<Eigen::Vector3d, 2>> {
    const Eigen::Vector2d rp = f[0] - f[2];
    const Eigen::Vector2d rq = f[1] - f[2];
    const double zp_sq = c_sq - rp.squaredNorm();
    const double zq_sq = b_sq - rq.squaredNorm();
    const double pq_excess = a_sq - (f[0] - f[1]).squaredNorm();
    if (zp_sq < -sq_slack || zq_sq < -sq_slack || pq_excess < -sq_slack) return std::nullopt;
    const double zp = std::sqrt(std::max(zp_sq, 0.0));
    double zq = std::sqrt(std::max(zq_sq, 0.0));
    const double gap_same = std::abs((zp - zq) * (zp - zq) - pq_excess);
    const double gap_flip = std::abs((zp + zq) * (zp + zq) - pq_excess);
    if (gap_flip < gap_same) zq = -zq;
    if (std::min(gap_same, gap_flip) > closure_slack) return std::nullopt;
    return std::array<Eigen::Vector3d, 2>{Eigen::Vector3d(rp.x(), rp.y(), zp),
                                          Eigen::Vector3d(rq.x(), rq.y(), zq)};
  };
  const auto e = lift(frame1);
  const auto g = lift(frame2);
  if (!e || !g) return std::nullopt;

  const Eigen::Vector3d n1 = (*e)[0].cross((*e)[1]);
  const Eigen::Vector3d n2 = (*g)[0].cross((*g)[1]);
  if (!(n1.norm() > 1e-9 * (*e)[0].norm() * (*e)[1].norm())) {
    throw Error(ErrorKind::kDegenerate, "P, Q, R are collinear (RP x RQ vanishes)");
  }

  TriangleTransfer t;
  t.r1_ = frame1[2];
  t.r2_ = frame2[2];
  t.frame1_edges_ = *e;
  Eigen::Matrix3d basis1;
  basis1 << (*e)[0], (*e)[1], n1;
  t.basis1_inv_ = basis1.inverse();
  t.basis2_ << (*g)[0], (*g)[1], n2;
  t.normal_norm_ = n1.norm();
  return t;
}

Line2 TriangleTransfer::transfer_ray(const Eigen::Vector2d& x1) const {
  // Coordinates in the (RP, RQ, RP x RQ) basis of the ray point at depth z
  // are k0 + z * kz.
  const Eigen::Vector2d w = x1 - r1_;
  const Eigen::Vector3d k0 = basis1_inv_ * Eigen::Vector3d(w.x(), w.y(), 0.0);
  const Eigen::Vector3d kz = basis1_inv_.col(2);
  if (!(std::abs(kz.z()) * normal_norm_ > 1e-12)) {
    throw Error(ErrorKind::kDegenerate, "viewing ray is parallel to plane RPQ");
  }
  const double z_a = -k0.z() / kz.z();                         // on plane RPQ
  const double z_b = (1.0 / normal_norm_ - k0.z()) / kz.z();   // plane shifted one unit
  const Eigen::Vector2d t2a = r2_ + (basis2_ * (k0 + z_a * kz)).head<2>();
  const Eigen::Vector2d t2b = r2_ + (basis2_ * (k0 + z_b * kz)).head<2>();

  Line2 line;
  line.origin = t2a;
  line.direction = t2b - t2a;
  line.degenerate = !(line.direction.norm() > 1e-12 * basis2_.norm());
  return line;
}

namespace {

struct BranchFit {
  FourPointResidual score;
  std::optional<TriangleTransfer> transfer;
};

TriangleDistances tri_sq(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                         const Eigen::Vector2d& r) {
  return {(p - q).squaredNorm(), (q - r).squaredNorm(), (r - p).squaredNorm()};
}

std::optional<BranchFit> best_branch(const Quad2& f1, const Quad2& f2, const BofCCoeffs& coeffs,
                                     double c_sq, double tol) {
  std::optional<BranchFit> best;
  const auto roots = solve_b_given_c(coeffs, c_sq, tol);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double b_sq = roots[i];
    const double a_sq = coeffs.a_sq(b_sq, c_sq);
    auto transfer = TriangleTransfer::build({f1[0], f1[1], f1[2]}, {f2[0], f2[1], f2[2]}, a_sq,
                                            b_sq, c_sq, tol);
    if (!transfer) continue;
    const double d = transfer->transfer_ray(f1[3]).distance(f2[3]);
    if (!best || d < best->score.residual) {
      best = BranchFit{FourPointResidual{d, i, a_sq, b_sq, c_sq}, std::move(transfer)};
    }
  }
  return best;
}

}  // namespace

std::optional<FourPointResidual> collinearity_residual(const Quad2& frame1, const Quad2& frame2,
                                                       double c_sq, double tol) {
  const BofCCoeffs coeffs = b_of_c_coeffs(tri_sq(frame1[0], frame1[1], frame1[2]),
                                          tri_sq(frame2[0], frame2[1], frame2[2]), tol);
  const auto fit = best_branch(frame1, frame2, coeffs, c_sq, tol);
  if (!fit) return std::nullopt;
  return fit->score;
}

std::optional<FourPointResidual> collinearity_residual_4pt(const FrameObservation& frame1,
                                                           const FrameObservation& frame2,
                                                           const Assignment& assignment,
                                                           double c_sq, double tol) {
  if (frame1.size() < 4) throw Error(ErrorKind::kInvalidInput, "frame 1 needs 4 points");
  Quad2 a, b;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t j = assignment.targets[i];
    if (j >= frame2.size()) throw Error(ErrorKind::kInvalidInput, "assignment out of range");
    a[i] = frame1[i].point.vec();
    b[i] = frame2[j].point.vec();
  }
  return collinearity_residual(a, b, c_sq, tol);
}

std::optional<FourPointFit> fit_four_points(const Quad2& frame1, const Quad2& frame2, double tol) {
  // Cyclic relabeling of P, Q, R with the largest elimination pivot.
  static constexpr std::array<std::array<std::size_t, 3>, 3> kCycles{{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}};
  std::optional<BofCCoeffs> coeffs;
  std::array<std::size_t, 3> roles{0, 1, 2};
  double best_pivot = -1.0;
  for (const auto& cyc : kCycles) {
    const TriangleDistances t1 = tri_sq(frame1[cyc[0]], frame1[cyc[1]], frame1[cyc[2]]);
    const TriangleDistances t2 = tri_sq(frame2[cyc[0]], frame2[cyc[1]], frame2[cyc[2]]);
    const double pivot = std::abs(quad_coeffs(t1).coef_a - quad_coeffs(t2).coef_a);
    if (pivot > best_pivot) {
      try {
        coeffs = b_of_c_coeffs(t1, t2, tol);
        roles = cyc;
        best_pivot = pivot;
      } catch (const Error&) {
      }
    }
  }
  if (!coeffs) throw Error(ErrorKind::kDegenerate, "elimination breaks down for every labeling");

  const Quad2 a{frame1[roles[0]], frame1[roles[1]], frame1[roles[2]], frame1[3]};
  const Quad2 b{frame2[roles[0]], frame2[roles[1]], frame2[roles[2]], frame2[3]};

  double scale = 0.0;
  for (const auto* f : {&a, &b}) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) {
        scale = std::max(scale, ((*f)[i] - (*f)[j]).squaredNorm());
      }
    }
  }
  double c_sq = kInitialCFactor * kInitialCFactor *
                std::max({(a[2] - a[0]).squaredNorm(), (b[2] - b[0]).squaredNorm(), 1e-12 * scale});
  for (int step = 0; step <= kCScanSteps; ++step) {
    if (auto fit = best_branch(a, b, *coeffs, c_sq, tol)) {
      return FourPointFit{fit->score, roles, std::move(fit->transfer)};
    }
    c_sq *= kCScanFactor * kCScanFactor;
  }
  return std::nullopt;
}

double rigidity_score(const FrameObservation& frame1, const FrameObservation& frame2, double tol) {
  if (frame1.size() < 4) throw Error(ErrorKind::kInvalidInput, "rigidity needs 4 points");
  Quad2 a, b;
  for (std::size_t i = 0; i < 4; ++i) {
    a[i] = frame1[i].point.vec();
    b[i] = frame2.at(frame1[i].label).vec();
  }
  const auto fit = fit_four_points(a, b, tol);
  return fit ? fit->score.residual : std::numeric_limits<double>::infinity();
}

FivePointResidual residual_5pt(const FrameObservation& frame1, const FrameObservation& frame2,
                               double tol) {
  if (frame1.size() < 5) throw Error(ErrorKind::kInvalidInput, "residual_5pt needs 5 points");
  std::array<Eigen::Vector2d, 5> x1, x2;
  for (std::size_t i = 0; i < 5; ++i) {
    x1[i] = frame1[i].point.vec();
    x2[i] = frame2.at(frame1[i].label).vec();
  }
  enum { P, Q, R, T, S };

  // Affine coordinates of S1 against (origin; origin->P, origin->Q) carry
  // over unchanged to the hit of S's ray with the plane through those points.
  const auto transfer = [&](int origin) {
    Eigen::Matrix2d m;
    m.col(0) = x1[P] - x1[origin];
    m.col(1) = x1[Q] - x1[origin];
    const double det = m.determinant();
    if (!(std::abs(det) > 1e-9 * m.col(0).norm() * m.col(1).norm())) {
      throw Error(ErrorKind::kDegenerate, "basis vectors are parallel in frame 1");
    }
    const Eigen::Vector2d ab = m.inverse() * (x1[S] - x1[origin]);
    return Eigen::Vector2d(x2[origin] + ab.x() * (x2[P] - x2[origin]) + ab.y() * (x2[Q] - x2[origin]));
  };
  const Eigen::Vector2d s2a = transfer(T);
  const Eigen::Vector2d s2b = transfer(R);

  std::array<FrameObservation, 2> frames{frame1, frame2};
  const double diameter = std::sqrt(squared_diameter(frames));
  Line2 line{s2a, s2b - s2a, false};
  line.degenerate = !(line.direction.norm() > tol * diameter);
  return {line.distance(x2[S]), line.degenerate};
}

}  // namespace orthosfm
