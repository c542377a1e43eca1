// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "study.hpp"

#include <chrono>
#include <cstdio>

#include "io.hpp"

namespace pillfit {

DesignVector five_bar_pills() {
  return DesignVector({
      PillParams(0.15, 0.15, 1.85, 0.15, 0.07),  // bottom chord
      PillParams(0.55, 0.85, 1.45, 0.85, 0.06),  // top chord
      PillParams(0.15, 0.15, 0.55, 0.85, 0.06),  // left side
      PillParams(1.85, 0.15, 1.45, 0.85, 0.06),  // right side
      PillParams(1.00, 0.15, 1.00, 0.85, 0.07),  // central vertical
  });
}

ModelSettings five_bar_settings() {
  ModelSettings ms;
  ms.grid.nx = 120;
  ms.grid.ny = 60;
  ms.grid.lx = 2.0;
  ms.grid.ly = 1.0;
  ms.grid.pad = 0.1;
  ms.grid.quad_order = 3;
  ms.constraints = ConstraintSet::for_grid(ms.grid, 0.005, 0.05);
  ms.constraints.r_max = 0.5;
  return ms;
}

DesignVector default_cross(int n, double r0, const ConstraintSet& cs) {
  const auto [rows, cols] = cross_layout(n, cs.x1 - cs.x0, cs.y1 - cs.y0);
  return cross_init(rows, cols, n, r0, cs.l_max, cs);
}

StudyRow run_study_case(const StudyCase& c, const DesignVector& truth,
                        const std::vector<StageConfig>& stages) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelSettings& ms = c.settings;
  GridSpec raster = ms.grid;
  if (c.target_order > 0) raster.quad_order = c.target_order;
  const ElementField target = generate_target(truth, raster, ms.tspec);
  const DesignVector init = default_cross(c.pills, 0.05, ms.constraints);
  const StagedResult res = run_staged(target, init, stages, ms);

  StudyRow row;
  row.label = c.label;
  row.nx = ms.grid.nx;
  row.ny = ms.grid.ny;
  row.quad_order = ms.grid.quad_order;
  row.hessian = ms.solver.hessian_mode == HessianMode::Exact ? "exact" : "lbfgs";
  row.pills = c.pills;
  row.objective_norm = tracking_mse(target, res.design, ms);
  row.objective = row.objective_norm * ms.grid.element_count();
  ModelSettings ref = ms;
  ref.grid = raster;
  row.objective_ref = tracking_mse(target, res.design, ref) * ms.grid.element_count();
  row.evals = res.eval_count;
  row.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::vector<StudyCase> resolution_cases(
    const ModelSettings& base, const std::vector<std::pair<int, int>>& meshes,
    int pills) {
  std::vector<StudyCase> out;
  for (const auto& [nx, ny] : meshes) {
    StudyCase c{std::to_string(nx) + "x" + std::to_string(ny), base, pills};
    c.settings.grid.nx = nx;
    c.settings.grid.ny = ny;
    out.push_back(c);
  }
  return out;
}

std::vector<StudyCase> quadrature_cases(const ModelSettings& base,
                                        const std::vector<int>& orders,
                                        int pills) {
  std::vector<StudyCase> out;
  for (int q : orders) {
    StudyCase c{"q" + std::to_string(q), base, pills};
    c.settings.grid.quad_order = q;
    out.push_back(c);
  }
  return out;
}

std::vector<StudyCase> hessian_cases(const ModelSettings& base, int pills,
                                     int history) {
  StudyCase exact{"exact", base, pills};
  exact.settings.solver.hessian_mode = HessianMode::Exact;
  StudyCase lbfgs{"lbfgs" + std::to_string(history), base, pills};
  lbfgs.settings.solver.hessian_mode = HessianMode::LBFGS;
  lbfgs.settings.solver.history = history;
  return {exact, lbfgs};
}

std::vector<StudyCase> count_cases(const ModelSettings& base,
                                   const std::vector<int>& counts) {
  std::vector<StudyCase> out;
  for (int n : counts) out.push_back({"n" + std::to_string(n), base, n});
  return out;
}

std::string study_to_csv(const std::vector<StudyRow>& rows) {
  std::string s = "label,nx,ny,quad_order,hessian,pills,objective,"
                  "objective_norm,objective_ref,evals,seconds\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%s,%d,%.17g,%.17g,%.17g,%d,%.3f\n",
                  r.label.c_str(), r.nx, r.ny, r.quad_order, r.hessian.c_str(),
                  r.pills, r.objective, r.objective_norm, r.objective_ref,
                  r.evals, r.seconds);
    s += buf;
  }
  return s;
}

}  // namespace pillfit
