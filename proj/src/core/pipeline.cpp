// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "error.hpp"

namespace pillfit {

std::vector<StageConfig> default_stages() {
  StageConfig explore;
  explore.name = "exploration";
  explore.objective = ObjectiveKind::Reward;
  explore.ext = 0.2;
  explore.tol = 1e-2;
  explore.radius_frozen = true;
  explore.fixed_radius = 0.05;

  StageConfig bridge;
  bridge.name = "bridging";
  bridge.ext = 0.1;
  bridge.tol = 1e-3;

  StageConfig converge;
  converge.name = "convergence";
  converge.ext = 0.0;
  converge.tol = 1e-7;
  return {explore, bridge, converge};
}

void HeuristicConfig::validate() const {
  if (!(ar_min >= 0.0) || !(ur_min >= 0.0) || !(theta_lim >= 0.0) ||
      !(d_min >= 0.0)) {
    throw ValidationError("heuristic thresholds must be >= 0");
  }
}

void RefinementConfig::validate() const {
  if (!(tau_res > 0.0 && tau_res < 1.0)) {
    throw ValidationError("refinement tau_res must lie in (0, 1)");
  }
  if (k_max < 1) throw ValidationError("refinement k_max must be >= 1");
  if (!(r_seed > 0.0)) throw ValidationError("refinement r_seed must be > 0");
  if (fixed_r && !(*fixed_r > 0.0)) {
    throw ValidationError("refinement fixed_r must be > 0");
  }
  if (!(eps_abs >= 0.0) || !(eps_rel >= 0.0)) {
    throw ValidationError("refinement eps_abs/eps_rel must be >= 0");
  }
}

// ---- initialization ----

std::pair<int, int> cross_layout(int n, double lx, double ly) {
  if (n < 1) return {1, 1};
  int best_r = 1, best_c = 1;
  int best_cap = std::numeric_limits<int>::max();
  double best_skew = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= n; ++r) {
    const int c = std::max(1, (n + 2 * r - 1) / (2 * r));
    const int cap = 2 * r * c;
    const double skew = std::abs(std::log((lx / c) / (ly / r)));
    if (cap < best_cap || (cap == best_cap && skew <= best_skew + 1e-12)) {
      best_cap = cap;
      best_skew = skew;
      best_r = r;
      best_c = c;
    }
  }
  return {best_r, best_c};
}

DesignVector cross_init(int rows, int cols, int n, double r0,
                        std::optional<double> l_max, const ConstraintSet& cs) {
  if (rows < 1 || cols < 1) throw ValidationError("cross grid needs rows, cols >= 1");
  if (n < 0 || n > 2 * rows * cols) {
    throw ValidationError("cross init: n = " + std::to_string(n) +
                          " exceeds capacity 2*R*C = " +
                          std::to_string(2 * rows * cols));
  }
  const double dx = (cs.x1 - cs.x0) / cols;
  const double dy = (cs.y1 - cs.y0) / rows;
  const double diag = std::hypot(dx, dy);
  double len = 0.95 * diag;
  if (l_max) len = std::min(len, *l_max);
  const double ux = dx / diag, uy = dy / diag;
  const double r = std::max(r0, cs.r_min);

  DesignVector out;
  for (int j = 0; j < rows && out.size() < n; ++j) {
    for (int i = 0; i < cols && out.size() < n; ++i) {
      const double cx = cs.x0 + (i + 0.5) * dx;
      const double cy = cs.y0 + (j + 0.5) * dy;
      const double h = 0.5 * len;
      out.push_back(PillParams(cx - h * ux, cy - h * uy, cx + h * ux,
                               cy + h * uy, r));
      if (out.size() < n) {
        out.push_back(PillParams(cx - h * ux, cy + h * uy, cx + h * ux,
                                 cy - h * uy, r));
      }
    }
  }
  return make_feasible(out, cs);
}

DesignVector randomized_cross_init(int rows, int cols, int n, double r0,
                                   std::optional<double> l_max,
                                   const ConstraintSet& cs, double theta_max,
                                   std::uint64_t seed) {
  DesignVector base = cross_init(rows, cols, n, r0, l_max, cs);
  if (!(theta_max > 0.0)) return base;
  std::mt19937_64 rng(seed);
  const double lim = theta_max * std::numbers::pi / 180.0;
  std::uniform_real_distribution<double> angle(-lim, lim);
  for (auto& p : base.pills) {
    const double th = angle(rng);
    const Point2 c = p.center();
    const double hx = 0.5 * (p.qx() - p.px());
    const double hy = 0.5 * (p.qy() - p.py());
    const double rx = std::cos(th) * hx - std::sin(th) * hy;
    const double ry = std::sin(th) * hx + std::cos(th) * hy;
    p = PillParams(c.x - rx, c.y - ry, c.x + rx, c.y + ry, p.r());
  }
  return make_feasible(base, cs);
}

DesignVector make_feasible(const DesignVector& design, const ConstraintSet& cs) {
  DesignVector out = design;
  const double w = cs.x1 - cs.x0;
  const double h = cs.y1 - cs.y0;
  for (auto& p : out.pills) {
    double r = std::max(p.r(), std::max(cs.r_min, 1e-9));
    if (cs.r_max) r = std::min(r, *cs.r_max);

    Point2 c = p.center();
    double ex = p.qx() - p.px();
    double ey = p.qy() - p.py();
    const double len = std::hypot(ex, ey);
    const double ux = len > 0.0 ? ex / len : 1.0;
    const double uy = len > 0.0 ? ey / len : 0.0;
    double target = std::max(len, 1e-6);
    if (cs.l_min > 0.0) target = std::max(target, cs.l_min * (1.0 + 1e-3));
    if (cs.l_max) target = std::min(target, *cs.l_max * (1.0 - 1e-3));
    // Fit the segment's extent into the box.
    if (std::abs(ux) * target > w) target = w / std::abs(ux);
    if (std::abs(uy) * target > h) target = h / std::abs(uy);
    const double hx = 0.5 * target * ux;
    const double hy = 0.5 * target * uy;
    c.x = std::clamp(c.x, cs.x0 + std::abs(hx), cs.x1 - std::abs(hx));
    c.y = std::clamp(c.y, cs.y0 + std::abs(hy), cs.y1 - std::abs(hy));
    auto clampx = [&](double v) { return std::clamp(v, cs.x0, cs.x1); };
    auto clampy = [&](double v) { return std::clamp(v, cs.y0, cs.y1); };
    p = PillParams(clampx(c.x - hx), clampy(c.y - hy), clampx(c.x + hx),
                   clampy(c.y + hy), r);
  }
  return out;
}

// ---- staged optimization ----

namespace {

ObjectiveContext make_context(const StageConfig& stage, const ModelSettings& ms,
                              const ElementField& target,
                              const ElementField* mask) {
  ObjectiveContext ctx;
  ctx.kind = stage.objective;
  ctx.tspec = stage.tspec ? &*stage.tspec : &ms.tspec;
  ctx.aspec = stage.aspec ? &*stage.aspec : &ms.aspec;
  ctx.grid = &ms.grid;
  ctx.target = &target;
  ctx.element_mask = mask;
  ctx.ext = stage.ext;
  ctx.threads = ms.threads;
  return ctx;
}

}  // namespace

StageResult run_stage(const ElementField& target, const DesignVector& init,
                      const StageConfig& stage, const ModelSettings& ms,
                      const ElementField* mask) {
  StageResult out;
  out.report.name = stage.name;
  out.design = init;

  DesignVector start = init;
  if (stage.fixed_radius) {
    for (auto& p : start.pills) p.set_radius(*stage.fixed_radius);
  }
  for (size_t m = 0; m < start.radius_frozen.size(); ++m) {
    start.radius_frozen[m] = start.radius_frozen[m] || stage.radius_frozen;
  }
  // Frozen radii stay exactly as given; only free radii are clamped.
  {
    DesignVector fixed_up = make_feasible(start, ms.constraints);
    for (int m = 0; m < start.size(); ++m) {
      if (start.radius_frozen[m]) {
        fixed_up.pills[m].set_radius(start.pills[m].r());
      }
    }
    start = fixed_up;
  }

  const ObjectiveContext ctx = make_context(stage, ms, target, mask);
  const int n = start.size();
  const int dim = 5 * n;
  const ConstraintSet& cs = ms.constraints;

  SmoothProblem prob;
  prob.dim = dim;
  prob.lower.resize(dim);
  prob.upper.resize(dim);
  prob.fixed.assign(dim, false);
  for (int m = 0; m < n; ++m) {
    const int b = 5 * m;
    prob.lower[b + kPx] = prob.lower[b + kQx] = cs.x0;
    prob.upper[b + kPx] = prob.upper[b + kQx] = cs.x1;
    prob.lower[b + kPy] = prob.lower[b + kQy] = cs.y0;
    prob.upper[b + kPy] = prob.upper[b + kQy] = cs.y1;
    prob.lower[b + kR] = std::max(cs.r_min, 1e-9);
    prob.upper[b + kR] =
        cs.r_max ? *cs.r_max : std::numeric_limits<double>::infinity();
    prob.fixed[b + kR] = start.radius_frozen[m];
  }
  prob.evaluate = [&](const Eigen::VectorXd& z, Eigen::VectorXd* g,
                      Eigen::MatrixXd* h) {
    const DesignVector dv = start.with_values(z);
    const int order = h ? 2 : (g ? 1 : 0);
    ObjectiveJet jet = objective_jet(ctx, dv, order);
    if (g) *g = std::move(jet.grad);
    if (h) *h = std::move(jet.hess);
    return jet.value;
  };
  prob.admissible = [n](const Eigen::VectorXd& z) {
    for (int m = 0; m < n; ++m) {
      const auto b = 5 * m;
      if (!(z[b + kR] > 0.0)) return false;
      if (z[b + kPx] == z[b + kQx] && z[b + kPy] == z[b + kQy]) return false;
    }
    return true;
  };
  if (cs.has_length_constraints()) {
    prob.constraints = [&](const Eigen::VectorXd& z) {
      std::vector<ConstraintJet> all;
      for (int m = 0; m < n; ++m) {
        const auto c = length_constraint_jet(
            PillParams::unchecked(z.segment<5>(5 * m)), cs.l_min, cs.l_max, m);
        all.insert(all.end(), c.begin(), c.end());
      }
      return all;
    };
  }

  SolveOptions opts = ms.solver;
  opts.tol = stage.tol;
  opts.max_iter = stage.max_iter;

  try {
    out.solve = minimize(prob, start.to_vector(), opts);
  } catch (const SolverError& e) {
    out.report.error = e.what();
    out.report.accepted = false;
    out.report.termination = "error";
    const double f0 = objective_value(ctx, init);
    out.report.initial_objective = out.report.final_objective = f0;
    return out;
  }

  const SolveResult& sr = out.solve;
  out.report.initial_objective = sr.objective_trace.front();
  out.report.final_objective = sr.objective_trace.back();
  out.report.iterations = sr.iterations;
  out.report.evals = sr.eval_count;
  out.report.termination = termination_name(sr.termination);
  out.report.accepted =
      out.report.final_objective <= out.report.initial_objective;
  if (out.report.accepted) {
    out.design = start.with_values(sr.x);
    out.design.radius_frozen = init.radius_frozen;
  }
  return out;
}

StagedResult run_staged(const ElementField& target, const DesignVector& init,
                        const std::vector<StageConfig>& stages,
                        const ModelSettings& ms) {
  if (stages.empty()) throw ValidationError("at least one stage is required");
  for (size_t s = 1; s < stages.size(); ++s) {
    if (stages[s].ext > stages[s - 1].ext) {
      throw ValidationError("stage ext must be non-increasing");
    }
  }
  StagedResult out;
  out.design = init;
  for (const auto& stage : stages) {
    StageResult sr = run_stage(target, out.design, stage, ms);
    for (size_t k = 0; k < sr.solve.objective_trace.size(); ++k) {
      out.trace.push_back({out.eval_count + sr.solve.trace_evals[k],
                           sr.solve.objective_trace[k], stage.name});
    }
    out.eval_count += sr.solve.eval_count;
    out.design = sr.design;
    out.stages.push_back(sr.report);
  }
  return out;
}

// ---- heuristics ----

AreaRatios area_uniqueness_ratios(const DesignVector& design,
                                  const TransitionSpec& tspec,
                                  const GridSpec& grid) {
  const int n = design.size();
  AreaRatios out;
  out.area.assign(n, 0.0);
  out.ar.assign(n, 0.0);
  out.ur.assign(n, 0.0);
  if (n == 0) return out;

  std::vector<double> unique(n, 0.0);
  struct Box {
    double x0, x1, y0, y1;
  };
  std::vector<Box> boxes;
  for (const auto& p : design.pills) {
    const double reach = p.r() + tspec.support_hi();
    boxes.push_back({std::min(p.px(), p.qx()) - reach,
                     std::max(p.px(), p.qx()) + reach,
                     std::min(p.py(), p.qy()) - reach,
                     std::max(p.py(), p.qy()) + reach});
  }
  const int q = grid.quad_order;
  const double w = grid.cell_area() / (q * q);
  std::vector<int> cand;
  std::vector<double> rho;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double ex0 = grid.x0 + i * grid.hx(), ex1 = ex0 + grid.hx();
      const double ey0 = grid.y0 + j * grid.hy(), ey1 = ey0 + grid.hy();
      cand.clear();
      for (int m = 0; m < n; ++m) {
        const Box& b = boxes[m];
        if (b.x1 < ex0 || b.x0 > ex1 || b.y1 < ey0 || b.y0 > ey1) continue;
        cand.push_back(m);
      }
      if (cand.empty()) continue;
      rho.resize(cand.size());
      for (Point2 x : quad_points_ij(grid, i, j, q)) {
        for (size_t a = 0; a < cand.size(); ++a) {
          rho[a] = pseudo_density(tspec, design.pills[cand[a]], x);
        }
        for (size_t a = 0; a < cand.size(); ++a) {
          if (rho[a] == 0.0) continue;
          double excl = rho[a];
          for (size_t b = 0; b < cand.size(); ++b) {
            if (b != a) excl *= 1.0 - rho[b];
          }
          out.area[cand[a]] += w * rho[a];
          unique[cand[a]] += w * excl;
        }
      }
    }
  }
  const double total = std::accumulate(out.area.begin(), out.area.end(), 0.0);
  for (int m = 0; m < n; ++m) {
    out.ar[m] = total > 0.0 ? out.area[m] / total : 0.0;
    out.ur[m] = out.area[m] > 0.0
                    ? std::clamp(unique[m] / out.area[m], 0.0, 1.0)
                    : 0.0;
  }
  return out;
}

DesignVector prune(const DesignVector& design, const AreaRatios& ratios,
                   const HeuristicConfig& cfg) {
  if (ratios.ar.size() != design.pills.size() ||
      ratios.ur.size() != design.pills.size()) {
    throw ValidationError("AR/UR vectors do not match the design");
  }
  DesignVector out;
  for (int m = 0; m < design.size(); ++m) {
    if (ratios.ar[m] < cfg.ar_min || ratios.ur[m] < cfg.ur_min) continue;
    out.push_back(design.pills[m], design.radius_frozen[m]);
  }
  return out;
}

namespace {

double point_segment_distance(Point2 x, const PillParams& p) {
  return unsigned_distance(x, p);
}

double segment_segment_distance(const PillParams& a, const PillParams& b) {
  // Non-crossing segments attain the minimum at an endpoint.
  const double ax = a.qx() - a.px(), ay = a.qy() - a.py();
  const double bx = b.qx() - b.px(), by = b.qy() - b.py();
  auto orient = [](double ux, double uy, double vx, double vy) {
    return ux * vy - uy * vx;
  };
  const double o1 = orient(ax, ay, b.px() - a.px(), b.py() - a.py());
  const double o2 = orient(ax, ay, b.qx() - a.px(), b.qy() - a.py());
  const double o3 = orient(bx, by, a.px() - b.px(), a.py() - b.py());
  const double o4 = orient(bx, by, a.qx() - b.px(), a.qy() - b.py());
  if (o1 * o2 < 0.0 && o3 * o4 < 0.0) return 0.0;
  return std::min({point_segment_distance(a.p(), b),
                   point_segment_distance(a.q(), b),
                   point_segment_distance(b.p(), a),
                   point_segment_distance(b.q(), a)});
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

DesignVector group_merge(const DesignVector& design,
                         const HeuristicConfig& cfg) {
  const int n = design.size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const double lim = cfg.theta_lim * std::numbers::pi / 180.0;
  std::vector<double> angle(n);
  for (int m = 0; m < n; ++m) {
    const auto& p = design.pills[m];
    double a = std::atan2(p.qy() - p.py(), p.qx() - p.px());
    a = std::fmod(a, std::numbers::pi);
    if (a < 0.0) a += std::numbers::pi;
    angle[m] = a;
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      double diff = std::abs(angle[a] - angle[b]);
      diff = std::min(diff, std::numbers::pi - diff);
      if (diff > lim + 1e-12) continue;
      const auto& pa = design.pills[a];
      const auto& pb = design.pills[b];
      double dist = 0.0;
      if (cfg.proximity == Proximity::CenterDistance) {
        dist = std::hypot(pa.center().x - pb.center().x,
                          pa.center().y - pb.center().y);
      } else {
        dist = segment_segment_distance(pa, pb);
      }
      if (!(dist < cfg.d_min)) continue;
      const int ra = find_root(parent, a);
      const int rb = find_root(parent, b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }

  DesignVector out;
  std::vector<char> done(n, 0);
  for (int m = 0; m < n; ++m) {
    const int root = find_root(parent, m);
    if (done[root]) continue;
    done[root] = 1;
    int rep = -1;
    double rmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      if (find_root(parent, k) != root) continue;
      rmin = std::min(rmin, design.pills[k].r());
      if (rep < 0 || design.pills[k].length() > design.pills[rep].length()) {
        rep = k;
      }
    }
    PillParams kept = design.pills[rep];
    kept.set_radius(std::max(0.0, rmin));
    out.push_back(kept, design.radius_frozen[rep]);
  }
  return out;
}

HeuristicsReport apply_heuristics(const DesignVector& design,
                                  const ModelSettings& ms,
                                  const HeuristicConfig& cfg) {
  HeuristicsReport rep;
  rep.ratios = area_uniqueness_ratios(design, ms.tspec, ms.grid);
  rep.pruned = prune(design, rep.ratios, cfg);
  if (rep.pruned.empty() && !design.empty()) {
    const auto it = std::max_element(rep.ratios.ar.begin(), rep.ratios.ar.end());
    const auto m = static_cast<size_t>(it - rep.ratios.ar.begin());
    rep.pruned.push_back(design.pills[m], design.radius_frozen[m]);
    rep.restored = true;
  }
  rep.merged = group_merge(rep.pruned, cfg);
  return rep;
}

// ---- refinement ----

double tracking_mse(const ElementField& target, const DesignVector& design,
                    const ModelSettings& ms) {
  ObjectiveContext ctx;
  ctx.kind = ObjectiveKind::Tracking;
  ctx.tspec = &ms.tspec;
  ctx.aspec = &ms.aspec;
  ctx.grid = &ms.grid;
  ctx.target = &target;
  ctx.threads = ms.threads;
  return normalized_objective(objective_value(ctx, design), ms.grid);
}

RefineResult refine_loop(const ElementField& target, const DesignVector& design,
                         const RefinementConfig& rcfg,
                         const std::vector<StageConfig>& stages,
                         const ModelSettings& ms) {
  rcfg.validate();
  if (stages.empty()) throw ValidationError("refinement needs stage presets");
  RefineResult out;
  out.design = design;
  const GridSpec& grid = ms.grid;
  int eval_offset = 0;
  auto log_trace = [&](const StageResult& sr, const std::string& label) {
    for (size_t k = 0; k < sr.solve.objective_trace.size(); ++k) {
      out.trace.push_back({eval_offset + sr.solve.trace_evals[k],
                           sr.solve.objective_trace[k], label});
    }
    eval_offset += sr.solve.eval_count;
  };

  double j_cur = tracking_mse(target, out.design, ms);
  for (int step = 1;; ++step) {
    if (step > rcfg.k_max) {
      out.stop_reason = "k_max";
      break;
    }
    const ElementField current =
        project_field(out.design, ms.tspec, ms.aspec, grid, 0.0, ms.threads);
    const ElementField mask = residual_mask(target, current, rcfg.tau_res);
    // The seed is fitted against what the current pills leave uncovered.
    ElementField uncovered = residual_field(target, current);
    for (double& v : uncovered.values) v = std::max(v, 0.0);
    int count = 0;
    double sx = 0.0, sy = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        if (mask.at(i, j) == 0.0) continue;
        ++count;
        sx += grid.x0 + (i + 0.5) * grid.hx();
        sy += grid.y0 + (j + 0.5) * grid.hy();
      }
    }
    if (count == 0) {
      out.stop_reason = "empty_mask";
      break;
    }

    RefineAudit audit;
    audit.step = step;
    audit.mask_elements = count;
    audit.centroid = {sx / count, sy / count};
    audit.j_before = j_cur;

    // Short diagonal seed at the mask centroid.
    const double seed_len =
        ms.constraints.l_min > 0.0 ? 2.0 * ms.constraints.l_min : 0.1;
    const double hd = 0.5 * seed_len * std::numbers::sqrt2 / 2.0;
    const double r_seed = rcfg.fixed_r.value_or(rcfg.r_seed);
    DesignVector seed;
    seed.push_back(PillParams(audit.centroid.x - hd, audit.centroid.y - hd,
                              audit.centroid.x + hd, audit.centroid.y + hd,
                              r_seed),
                   rcfg.fixed_r.has_value());
    seed = make_feasible(seed, ms.constraints);
    if (rcfg.fixed_r) seed.pills[0].set_radius(*rcfg.fixed_r);

    StageConfig orient = stages.front();
    orient.name = "refine_orient";
    orient.objective = ObjectiveKind::Reward;
    orient.radius_frozen = true;
    orient.fixed_radius.reset();
    StageConfig local = stages.back();
    local.name = "refine_local";
    local.objective = ObjectiveKind::Tracking;
    local.fixed_radius.reset();
    local.radius_frozen = rcfg.fixed_r.has_value();
    StageConfig joint = stages.back();
    joint.name = "refine_joint";
    joint.objective = ObjectiveKind::Tracking;
    joint.fixed_radius.reset();
    joint.radius_frozen = false;

    DesignVector candidate;
    try {
      StageResult so = run_stage(uncovered, seed, orient, ms, &mask);
      log_trace(so, orient.name);
      StageResult sl = run_stage(uncovered, so.design, local, ms, &mask);
      log_trace(sl, local.name);
      candidate = out.design;
      candidate.push_back(sl.design.pills[0], rcfg.fixed_r.has_value());
      StageResult sj = run_stage(target, candidate, joint, ms);
      log_trace(sj, joint.name);
      candidate = sj.design;
      if (!sj.report.error.empty()) throw SolverError(sj.report.error);
    } catch (const Error& e) {
      audit.note = std::string("solver failure: ") + e.what();
      audit.accepted = false;
      out.audit.push_back(audit);
      out.stop_reason = "rejected";
      break;
    }

    audit.j_after = tracking_mse(target, candidate, ms);
    audit.delta_abs = j_cur - audit.j_after;
    audit.delta_rel = j_cur > 0.0 ? audit.delta_abs / j_cur : 0.0;
    audit.accepted =
        audit.delta_abs > rcfg.eps_abs || audit.delta_rel > rcfg.eps_rel;
    out.audit.push_back(audit);
    if (!audit.accepted) {
      out.stop_reason = "rejected";
      break;
    }
    out.design = candidate;
    j_cur = audit.j_after;
  }
  return out;
}

}  // namespace pillfit
