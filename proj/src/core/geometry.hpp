// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_GEOMETRY_HPP
#define PILLFIT_CORE_GEOMETRY_HPP

#include <Eigen/Core>

namespace pillfit {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// Slots of a pill's parameter block.
enum Slot : int { kPx = 0, kPy = 1, kQx = 2, kQy = 3, kR = 4 };

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// A capsule: segment P-Q dilated by radius r.
//
// The five scalars are stored in the fixed order (px, py, qx, qy, r), which is
// also the order of every gradient and Hessian produced for a pill.
class PillParams {
 public:
  PillParams() = default;
  // Throws InvalidGeometry if P == Q or r is not positive/finite.
  PillParams(double px, double py, double qx, double qy, double r);

  static PillParams from_vector(const Vec5& z);
  // Skips validation; for solver trial points that are checked separately.
  static PillParams unchecked(const Vec5& z);

  Vec5 to_vector() const;

  double px() const { return px_; }
  double py() const { return py_; }
  double qx() const { return qx_; }
  double qy() const { return qy_; }
  double r() const { return r_; }
  double length() const;

  Point2 p() const { return {px_, py_}; }
  Point2 q() const { return {qx_, qy_}; }
  Point2 center() const { return {0.5 * (px_ + qx_), 0.5 * (py_ + qy_)}; }

  void set_radius(double r) { r_ = r; }

  bool operator==(const PillParams&) const = default;

 private:
  double px_ = 0.0, py_ = 0.0, qx_ = 1.0, qy_ = 0.0, r_ = 0.1;
};

enum class Branch { PointP, PointQ, Segment };

struct DistanceJet {
  double value = 0.0;
  Vec5 grad = Vec5::Zero();
  Mat5 hess = Mat5::Zero();
  Branch branch = Branch::Segment;
  // Set when x lies within eps_sing of the singular set; derivatives are then
  // unreliable although the value is still exact.
  bool singular = false;
};

inline constexpr double kDefaultEpsSing = 1e-12;

double unsigned_distance(Point2 x, const PillParams& pill);
double signed_distance(Point2 x, const PillParams& pill);

// Active branch of the unsigned distance. The segment candidate is admissible
// only when the projection of x falls onto [P, Q]; at the bounds Segment wins.
Branch active_branch(Point2 x, const PillParams& pill);

DistanceJet distance_jet(Point2 x, const PillParams& pill, bool is_signed,
                         double eps_sing = kDefaultEpsSing);

// Individual candidate jets (unsigned). Exposed for the transition-set checks.
DistanceJet point_p_jet(Point2 x, const PillParams& pill);
DistanceJet point_q_jet(Point2 x, const PillParams& pill);
DistanceJet segment_jet(Point2 x, const PillParams& pill);

}  // namespace pillfit

#endif
