// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "objective.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace pillfit {

const char* objective_name(ObjectiveKind kind) {
  return kind == ObjectiveKind::Tracking ? "tracking" : "reward";
}

namespace {

struct Partial {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  Eigen::MatrixXd gn;
};

// Adds w * (grad of element) into the dense vector and, for the Hessian,
// wg * g g^T + wh * H_e on the touched blocks.
void scatter(const ElementJet& ej, double w, Eigen::VectorXd& g) {
  for (size_t a = 0; a < ej.pills.size(); ++a) {
    g.segment<5>(5 * ej.pills[a]) += w * ej.grad.segment<5>(5 * a);
  }
}

void scatter_hess(const ElementJet& ej, double wg, double wh,
                  Eigen::MatrixXd& h, Eigen::MatrixXd* gn) {
  const auto k = ej.pills.size();
  for (size_t a = 0; a < k; ++a) {
    for (size_t b = 0; b < k; ++b) {
      auto blk = h.block<5, 5>(5 * ej.pills[a], 5 * ej.pills[b]);
      if (wh != 0.0 && ej.hess.size() > 0) {
        blk += wh * ej.hess.block<5, 5>(5 * a, 5 * b);
      }
      if (wg != 0.0) {
        const Mat5 outer = ej.grad.segment<5>(5 * a) *
                           ej.grad.segment<5>(5 * b).transpose();
        blk += wg * outer;
        if (gn) gn->block<5, 5>(5 * ej.pills[a], 5 * ej.pills[b]) += wg * outer;
      }
    }
  }
}

}  // namespace

ObjectiveJet objective_jet(const ObjectiveContext& ctx,
                           const DesignVector& design, int order,
                           Eigen::MatrixXd* gn) {
  if (!ctx.tspec || !ctx.aspec || !ctx.grid || !ctx.target) {
    throw ValidationError("objective context is incomplete");
  }
  const GridSpec& grid = *ctx.grid;
  const ElementField& target = *ctx.target;
  if (target.nx != grid.nx || target.ny != grid.ny) {
    throw ValidationError("target is " + std::to_string(target.nx) + "x" +
                          std::to_string(target.ny) + " but the grid is " +
                          std::to_string(grid.nx) + "x" +
                          std::to_string(grid.ny));
  }
  if (ctx.element_mask && !ctx.element_mask->same_shape(target)) {
    throw ValidationError("element mask does not match the grid");
  }

  const int n = design.size();
  const int dim = 5 * n;
  const bool tracking = ctx.kind == ObjectiveKind::Tracking;
  const bool want_gn = gn != nullptr && tracking && order >= 2;
  const int px = grid.pad_x();
  const int py = grid.pad_y();
  const int enx = grid.eval_nx();
  const int count = grid.eval_element_count();
  DensityModel model(design, *ctx.tspec, *ctx.aspec, grid, ctx.ext);

  const int threads = std::max(1, std::min(ctx.threads, count));
  std::vector<Partial> parts(threads);
  parallel_chunks(count, threads, [&](int begin, int end, int chunk) {
    Partial& part = parts[chunk];
    if (order >= 1) part.grad = Eigen::VectorXd::Zero(dim);
    if (order >= 2) part.hess = Eigen::MatrixXd::Zero(dim, dim);
    if (want_gn) part.gn = Eigen::MatrixXd::Zero(dim, dim);
    for (int idx = begin; idx < end; ++idx) {
      const int i = idx % enx - px;
      const int j = idx / enx - py;
      const bool inside = i >= 0 && i < grid.nx && j >= 0 && j < grid.ny;
      if (ctx.element_mask &&
          (!inside || ctx.element_mask->at(i, j) == 0.0)) {
        continue;
      }
      const double t = inside ? target.at(i, j) : 0.0;
      if (!tracking && t == 0.0) continue;  // no overlap term at all

      const ElementJet ej = model.element(i, j, order);
      if (tracking) {
        const double res = t - ej.value;
        part.value += res * res;
        if (order >= 1) scatter(ej, -2.0 * res, part.grad);
        if (order >= 2) {
          scatter_hess(ej, 2.0, -2.0 * res, part.hess,
                       want_gn ? &part.gn : nullptr);
        }
      } else {
        part.value -= ej.value * t;
        if (order >= 1) scatter(ej, -t, part.grad);
        if (order >= 2) scatter_hess(ej, 0.0, -t, part.hess, nullptr);
      }
    }
  });

  ObjectiveJet out;
  if (order >= 1) out.grad = Eigen::VectorXd::Zero(dim);
  if (order >= 2) out.hess = Eigen::MatrixXd::Zero(dim, dim);
  if (want_gn) *gn = Eigen::MatrixXd::Zero(dim, dim);
  for (const Partial& p : parts) {
    out.value += p.value;
    if (order >= 1 && p.grad.size() == dim) out.grad += p.grad;
    if (order >= 2 && p.hess.size() == dim * dim) out.hess += p.hess;
    if (want_gn && p.gn.size() == dim * dim) *gn += p.gn;
  }
  if (order >= 2) {
    // Blocks are scattered symmetrically; this only removes rounding skew.
    out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
  }
  return out;
}

double objective_value(const ObjectiveContext& ctx,
                       const DesignVector& design) {
  return objective_jet(ctx, design, 0).value;
}

ObjectiveJet tracking_jet(const DesignVector& design,
                          const TransitionSpec& tspec,
                          const AggregatorSpec& aspec, const GridSpec& grid,
                          const ElementField& target, double ext) {
  ObjectiveContext ctx;
  ctx.kind = ObjectiveKind::Tracking;
  ctx.tspec = &tspec;
  ctx.aspec = &aspec;
  ctx.grid = &grid;
  ctx.target = &target;
  ctx.ext = ext;
  return objective_jet(ctx, design, 2);
}

ObjectiveJet reward_jet(const DesignVector& design, const TransitionSpec& tspec,
                        const AggregatorSpec& aspec, const GridSpec& grid,
                        const ElementField& target, double ext) {
  ObjectiveContext ctx;
  ctx.kind = ObjectiveKind::Reward;
  ctx.tspec = &tspec;
  ctx.aspec = &aspec;
  ctx.grid = &grid;
  ctx.target = &target;
  ctx.ext = ext;
  return objective_jet(ctx, design, 2);
}

ConstraintSet ConstraintSet::for_grid(const GridSpec& grid, double r_min,
                                      double l_min) {
  ConstraintSet cs;
  cs.x0 = grid.x0;
  cs.y0 = grid.y0;
  cs.x1 = grid.x0 + grid.lx;
  cs.y1 = grid.y0 + grid.ly;
  cs.r_min = r_min;
  cs.l_min = l_min;
  return cs;
}

void ConstraintSet::validate() const {
  if (!(x1 > x0) || !(y1 > y0)) throw ValidationError("empty design box");
  if (!(r_min >= 0.0)) throw ValidationError("r_min must be >= 0");
  if (r_max && !(*r_max > r_min)) {
    throw ValidationError("r_max must exceed r_min");
  }
  if (!(l_min >= 0.0)) throw ValidationError("l_min must be >= 0");
  if (l_max && !(*l_max > l_min)) {
    throw ValidationError("l_max must exceed l_min");
  }
}

std::vector<ConstraintJet> length_constraint_jet(const PillParams& pill,
                                                 double l_min,
                                                 std::optional<double> l_max,
                                                 int block) {
  const double ex = pill.qx() - pill.px();
  const double ey = pill.qy() - pill.py();
  const double len2 = ex * ex + ey * ey;
  // d|Q-P|^2 / d(px, py, qx, qy)
  Eigen::Vector4d dl(-2.0 * ex, -2.0 * ey, 2.0 * ex, 2.0 * ey);
  Eigen::Matrix4d hl = Eigen::Matrix4d::Zero();
  for (int c = 0; c < 2; ++c) {
    hl(c, c) = 2.0;
    hl(c + 2, c + 2) = 2.0;
    hl(c, c + 2) = -2.0;
    hl(c + 2, c) = -2.0;
  }
  const int base = 5 * block;
  std::vector<int> idx = {base + kPx, base + kPy, base + kQx, base + kQy};

  std::vector<ConstraintJet> out;
  if (l_min > 0.0) {
    out.push_back({l_min * l_min - len2, idx, -dl, -hl});
  }
  if (l_max) {
    out.push_back({len2 - (*l_max) * (*l_max), idx, dl, hl});
  }
  return out;
}

std::vector<ConstraintJet> design_constraints(const DesignVector& design,
                                              const ConstraintSet& cs) {
  std::vector<ConstraintJet> out;
  for (int m = 0; m < design.size(); ++m) {
    auto c = length_constraint_jet(design.pills[m], cs.l_min, cs.l_max, m);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

ElementField residual_field(const ElementField& target,
                            const ElementField& current) {
  if (!target.same_shape(current)) {
    throw ValidationError("residual of fields with different shapes");
  }
  ElementField out(target.nx, target.ny);
  for (size_t e = 0; e < out.values.size(); ++e) {
    out.values[e] = target.values[e] - current.values[e];
  }
  return out;
}

ElementField residual_mask(const ElementField& target,
                           const ElementField& current, double tau_res) {
  ElementField res = residual_field(target, current);
  for (double& v : res.values) v = v > tau_res ? 1.0 : 0.0;
  return res;
}

double normalized_objective(double f, const GridSpec& grid) {
  return f / (static_cast<double>(grid.nx) * grid.ny);
}

}  // namespace pillfit
