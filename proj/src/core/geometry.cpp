// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "geometry.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace pillfit {

PillParams::PillParams(double px, double py, double qx, double qy, double r)
    : px_(px), py_(py), qx_(qx), qy_(qy), r_(r) {
  if (!std::isfinite(px) || !std::isfinite(py) || !std::isfinite(qx) ||
      !std::isfinite(qy) || !std::isfinite(r)) {
    throw InvalidGeometry("pill parameters must be finite");
  }
  if (px == qx && py == qy) {
    throw InvalidGeometry("degenerate pill: P == Q");
  }
  if (!(r > 0.0)) {
    throw InvalidGeometry("pill radius must be positive, got " +
                          std::to_string(r));
  }
}

PillParams PillParams::from_vector(const Vec5& z) {
  return PillParams(z[kPx], z[kPy], z[kQx], z[kQy], z[kR]);
}

PillParams PillParams::unchecked(const Vec5& z) {
  PillParams p;
  p.px_ = z[kPx];
  p.py_ = z[kPy];
  p.qx_ = z[kQx];
  p.qy_ = z[kQy];
  p.r_ = z[kR];
  return p;
}

Vec5 PillParams::to_vector() const {
  Vec5 z;
  z << px_, py_, qx_, qy_, r_;
  return z;
}

double PillParams::length() const { return std::hypot(qx_ - px_, qy_ - py_); }

namespace {

void require_nondegenerate(const PillParams& pill) {
  if (pill.px() == pill.qx() && pill.py() == pill.qy()) {
    throw InvalidGeometry("degenerate pill: P == Q");
  }
}

// Projection parameter of x onto the supporting line, scaled so that
// P -> 0 and Q -> 1.
double projection_parameter(Point2 x, const PillParams& pill) {
  const double ux = pill.qx() - pill.px();
  const double uy = pill.qy() - pill.py();
  return ((x.x - pill.px()) * ux + (x.y - pill.py()) * uy) / (ux * ux + uy * uy);
}

DistanceJet point_jet(Point2 x, double cx, double cy, int slot_x, int slot_y,
                      Branch branch) {
  DistanceJet jet;
  jet.branch = branch;
  const double ex = x.x - cx;
  const double ey = x.y - cy;
  const double d = std::hypot(ex, ey);
  jet.value = d;
  if (d == 0.0) {
    jet.singular = true;
    return jet;
  }
  const double d3 = d * d * d;
  jet.grad[slot_x] = -ex / d;
  jet.grad[slot_y] = -ey / d;
  jet.hess(slot_x, slot_x) = ey * ey / d3;
  jet.hess(slot_y, slot_y) = ex * ex / d3;
  jet.hess(slot_x, slot_y) = -ex * ey / d3;
  jet.hess(slot_y, slot_x) = jet.hess(slot_x, slot_y);
  return jet;
}

}  // namespace

DistanceJet point_p_jet(Point2 x, const PillParams& pill) {
  return point_jet(x, pill.px(), pill.py(), kPx, kPy, Branch::PointP);
}

DistanceJet point_q_jet(Point2 x, const PillParams& pill) {
  return point_jet(x, pill.qx(), pill.qy(), kQx, kQy, Branch::PointQ);
}

DistanceJet segment_jet(Point2 x, const PillParams& pill) {
  require_nondegenerate(pill);
  DistanceJet jet;
  jet.branch = Branch::Segment;

  const double x1 = x.x, x2 = x.y;
  const double px = pill.px(), py = pill.py(), qx = pill.qx(), qy = pill.qy();
  const double a = px - qx;
  const double b = py - qy;

  const double num = (x1 - qx) * b + (x2 - qy) * (qx - px);
  const double den = std::hypot(a, b);
  const double abs_n = std::abs(num);
  const double sgn = num > 0.0 ? 1.0 : (num < 0.0 ? -1.0 : 0.0);
  jet.value = abs_n / den;
  if (num == 0.0) jet.singular = true;

  Vec5 dn;
  dn << -(x2 - qy), (x1 - qx), -b + (x2 - qy), a - (x1 - qx), 0.0;
  Vec5 dd;
  dd << a / den, b / den, -a / den, -b / den, 0.0;

  // Second derivatives of the bilinear numerator: only (px,qy) and (py,qx).
  Mat5 d2n = Mat5::Zero();
  d2n(kPx, kQy) = d2n(kQy, kPx) = 1.0;
  d2n(kPy, kQx) = d2n(kQx, kPy) = -1.0;

  const double den3 = den * den * den;
  Eigen::Matrix2d m;
  m << b * b, -a * b, -a * b, a * a;
  m /= den3;
  Mat5 d2d = Mat5::Zero();
  d2d.block<2, 2>(0, 0) = m;
  d2d.block<2, 2>(2, 2) = m;
  d2d.block<2, 2>(0, 2) = -m;
  d2d.block<2, 2>(2, 0) = -m;

  const double den2 = den * den;
  jet.grad = (sgn * dn * den - abs_n * dd) / den2;

  // Quotient-rule Hessian of |N|/D, assembled on the upper triangle and
  // mirrored so the result is exactly symmetric.
  for (int i = 0; i < 4; ++i) {
    for (int k = i; k < 4; ++k) {
      const double h = sgn * d2n(i, k) / den -
                       sgn * (dn[i] * dd[k] + dn[k] * dd[i]) / den2 +
                       abs_n / den2 * (2.0 * dd[i] * dd[k] / den - d2d(i, k));
      jet.hess(i, k) = h;
      jet.hess(k, i) = h;
    }
  }
  return jet;
}

Branch active_branch(Point2 x, const PillParams& pill) {
  require_nondegenerate(pill);
  const double t = projection_parameter(x, pill);
  if (t < 0.0) return Branch::PointP;
  if (t > 1.0) return Branch::PointQ;
  return Branch::Segment;
}

double unsigned_distance(Point2 x, const PillParams& pill) {
  switch (active_branch(x, pill)) {
    case Branch::PointP:
      return std::hypot(x.x - pill.px(), x.y - pill.py());
    case Branch::PointQ:
      return std::hypot(x.x - pill.qx(), x.y - pill.qy());
    case Branch::Segment:
      break;
  }
  const double a = pill.px() - pill.qx();
  const double b = pill.py() - pill.qy();
  const double num = (x.x - pill.qx()) * b + (x.y - pill.qy()) * (pill.qx() - pill.px());
  return std::abs(num) / std::hypot(a, b);
}

double signed_distance(Point2 x, const PillParams& pill) {
  return unsigned_distance(x, pill) - pill.r();
}

DistanceJet distance_jet(Point2 x, const PillParams& pill, bool is_signed,
                         double eps_sing) {
  DistanceJet jet;
  switch (active_branch(x, pill)) {
    case Branch::PointP:
      jet = point_p_jet(x, pill);
      break;
    case Branch::PointQ:
      jet = point_q_jet(x, pill);
      break;
    case Branch::Segment:
      jet = segment_jet(x, pill);
      break;
  }
  if (jet.value <= eps_sing) jet.singular = true;
  if (is_signed) {
    jet.value -= pill.r();
    jet.grad[kR] = -1.0;
  }
  return jet;
}

}  // namespace pillfit
