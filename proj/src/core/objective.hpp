// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_OBJECTIVE_HPP
#define PILLFIT_CORE_OBJECTIVE_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "aggregation.hpp"
#include "grid.hpp"
#include "transition.hpp"

namespace pillfit {

enum class ObjectiveKind { Tracking, Reward };

const char* objective_name(ObjectiveKind kind);

struct ObjectiveJet {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Everything except the design that an objective evaluation depends on.
// target must match grid.nx x grid.ny; padded elements have target 0.
// If element_mask is set, only unpadded elements with a nonzero mask entry
// enter the sum.
struct ObjectiveContext {
  ObjectiveKind kind = ObjectiveKind::Tracking;
  const TransitionSpec* tspec = nullptr;
  const AggregatorSpec* aspec = nullptr;
  const GridSpec* grid = nullptr;
  const ElementField* target = nullptr;
  const ElementField* element_mask = nullptr;
  double ext = 0.0;
  int threads = 1;
};

// order 0: value; 1: + gradient; 2: + Hessian. For tracking, gn (if given)
// receives the Gauss-Newton part 2 sum grad grad^T on its own.
ObjectiveJet objective_jet(const ObjectiveContext& ctx,
                           const DesignVector& design, int order,
                           Eigen::MatrixXd* gn = nullptr);
double objective_value(const ObjectiveContext& ctx, const DesignVector& design);

ObjectiveJet tracking_jet(const DesignVector& design,
                          const TransitionSpec& tspec,
                          const AggregatorSpec& aspec, const GridSpec& grid,
                          const ElementField& target, double ext = 0.0);
ObjectiveJet reward_jet(const DesignVector& design, const TransitionSpec& tspec,
                        const AggregatorSpec& aspec, const GridSpec& grid,
                        const ElementField& target, double ext = 0.0);

// Design bounds and segment-length limits. A non-positive l_min switches the
// lower length constraint off.
struct ConstraintSet {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;  // endpoint box
  double r_min = 0.05;
  std::optional<double> r_max;
  double l_min = 0.05;
  std::optional<double> l_max;

  static ConstraintSet for_grid(const GridSpec& grid, double r_min,
                                double l_min);
  void validate() const;
  bool has_length_constraints() const { return l_min > 0.0 || l_max; }
};

// Smooth inequality g(z) <= 0 touching a few coordinates of the design.
struct ConstraintJet {
  double value = 0.0;
  std::vector<int> idx;      // global coordinates
  Eigen::VectorXd grad;      // w.r.t. idx
  Eigen::MatrixXd hess;      // w.r.t. idx
};

// g_lo = l_min^2 - |Q-P|^2 and, if l_max is set, g_hi = |Q-P|^2 - l_max^2.
// idx refers to the pill's own block (0..3) shifted by 5*block.
std::vector<ConstraintJet> length_constraint_jet(const PillParams& pill,
                                                 double l_min,
                                                 std::optional<double> l_max,
                                                 int block = 0);

std::vector<ConstraintJet> design_constraints(const DesignVector& design,
                                              const ConstraintSet& cs);

ElementField residual_field(const ElementField& target,
                            const ElementField& current);
// 1 where target - current > tau_res (strict), else 0.
ElementField residual_mask(const ElementField& target,
                           const ElementField& current, double tau_res);

// Mean error per element; reporting only.
double normalized_objective(double f, const GridSpec& grid);

}  // namespace pillfit

#endif
