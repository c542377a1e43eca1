// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <utility>

#include "error.hpp"
#include "study.hpp"

namespace pillfit {

ElementField resolve_target(RunConfig& cfg) {
  GridSpec& grid = cfg.model.grid;
  const TargetSource& src = cfg.target;
  if (!src.path.empty()) {
    ElementField f = load_target(src.path, src.format);
    if (cfg.grid_size_explicit) {
      if (f.nx != grid.nx || f.ny != grid.ny) {
        throw ValidationError(
            src.path + ": target is " + std::to_string(f.nx) + "x" +
            std::to_string(f.ny) + " but the grid is " +
            std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
      }
    } else {
      grid.nx = f.nx;
      grid.ny = f.ny;
      cfg.grid_size_explicit = true;
    }
    return f;
  }
  grid.validate();
  if (src.pills) return generate_target(*src.pills, grid, cfg.model.tspec);
  if (src.five_bar) return generate_target(five_bar_pills(), grid, cfg.model.tspec);
  throw ValidationError("no target given (target.path, target.pills or "
                        "target.five_bar)");
}

DesignVector make_init(const RunConfig& cfg) {
  const ConstraintSet& cs = cfg.model.constraints;
  const InitConfig& in = cfg.init;
  if (in.mode == InitMode::Pills) {
    return make_feasible(load_pills_csv(in.pills_path), cs);
  }
  const auto [rows, cols] = cross_layout(in.n, cs.x1 - cs.x0, cs.y1 - cs.y0);
  if (in.mode == InitMode::RandomizedCross) {
    return randomized_cross_init(rows, cols, in.n, in.r0, cs.l_max, cs,
                                 in.theta_max, cfg.seed);
  }
  return cross_init(rows, cols, in.n, in.r0, cs.l_max, cs);
}

namespace {

void append_trace(std::vector<TraceRow>& trace, int& offset,
                  const std::vector<TraceRow>& more, int evals) {
  for (TraceRow row : more) {
    row.eval_index += offset;
    trace.push_back(std::move(row));
  }
  offset += evals;
}

int trace_span(const std::vector<TraceRow>& rows) {
  return rows.empty() ? 0 : rows.back().eval_index;
}

}  // namespace

RunResult run_pipeline(const RunConfig& cfg, const ElementField& target,
                       const DesignVector& init) {
  cfg.validate();
  RunResult out;
  out.config = cfg;
  out.target = target;
  const ModelSettings& ms = cfg.model;
  if (target.nx != ms.grid.nx || target.ny != ms.grid.ny) {
    throw ValidationError("target and grid sizes differ");
  }

  StagedResult staged = run_staged(target, init, cfg.stages, ms);
  out.design = staged.design;
  out.trace = staged.trace;
  out.stages = staged.stages;
  int offset = staged.eval_count;

  if (cfg.heuristics_enabled) {
    HeuristicsReport rep = apply_heuristics(out.design, ms, cfg.heuristics);
    out.design = rep.merged;
    if (cfg.heuristics_reconverge) {
      StageConfig again = cfg.stages.back();
      again.name = "post_heuristics";
      StageResult sr = run_stage(target, out.design, again, ms);
      std::vector<TraceRow> rows;
      for (size_t k = 0; k < sr.solve.objective_trace.size(); ++k) {
        rows.push_back({sr.solve.trace_evals[k], sr.solve.objective_trace[k],
                        again.name});
      }
      append_trace(out.trace, offset, rows, sr.solve.eval_count);
      out.design = sr.design;
      out.stages.push_back(sr.report);
    }
    out.heuristics = std::move(rep);
  }

  if (cfg.refinement_enabled) {
    RefineResult rr =
        refine_loop(target, out.design, cfg.refinement, cfg.stages, ms);
    append_trace(out.trace, offset, rr.trace, trace_span(rr.trace));
    out.design = rr.design;
    out.refinement = std::move(rr);
  }

  out.objective_norm = tracking_mse(target, out.design, ms);
  out.objective = out.objective_norm * ms.grid.element_count();
  return out;
}

std::vector<StudyRow> run_study(const RunConfig& cfg, const std::string& kind) {
  cfg.validate();
  const StudyConfig& sc = cfg.study;
  std::vector<StudyCase> cases;
  if (kind == "resolution") {
    cases = resolution_cases(cfg.model, sc.resolutions, sc.pills);
  } else if (kind == "quadrature") {
    ModelSettings base = cfg.model;
    base.grid.nx = sc.quadrature_nx;
    base.grid.ny = sc.quadrature_ny;
    cases = quadrature_cases(base, sc.orders, sc.pills);
    // Each rule is judged against the target its own rule rasterizes.
    for (auto& c : cases) c.target_order = 0;
  } else if (kind == "hessian") {
    cases = hessian_cases(cfg.model, sc.pills, sc.history);
  } else if (kind == "count") {
    cases = count_cases(cfg.model, sc.counts);
  } else {
    throw ValidationError("unknown study \"" + kind +
                          "\" (resolution, quadrature, hessian, count)");
  }
  const DesignVector truth =
      cfg.target.pills ? *cfg.target.pills : five_bar_pills();
  std::vector<StudyRow> rows;
  for (const auto& c : cases) rows.push_back(run_study_case(c, truth, cfg.stages));
  return rows;
}

std::string stages_to_csv(const std::vector<StageReport>& stages) {
  std::string s = "stage,initial_objective,final_objective,accepted,"
                  "iterations,evals,termination,error\n";
  char buf[256];
  for (const auto& r : stages) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%d,%d,%d,%s,", r.name.c_str(),
                  r.initial_objective, r.final_objective, r.accepted ? 1 : 0,
                  r.iterations, r.evals, r.termination.c_str());
    std::string err = r.error;
    for (char& c : err) {
      if (c == ',' || c == '\n') c = ';';
    }
    s += buf + err + "\n";
  }
  return s;
}

std::string ratios_to_csv(const AreaRatios& ratios) {
  std::string s = "id,area,ar,ur\n";
  char buf[128];
  for (size_t m = 0; m < ratios.ar.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", m, ratios.area[m],
                  ratios.ar[m], ratios.ur[m]);
    s += buf;
  }
  return s;
}

std::string audit_to_csv(const std::vector<RefineAudit>& audit) {
  std::string s = "step,centroid_x,centroid_y,mask_elements,j_before,j_after,"
                  "delta_abs,delta_rel,accepted,note\n";
  char buf[256];
  for (const auto& a : audit) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%d,",
                  a.step, a.centroid.x, a.centroid.y, a.mask_elements,
                  a.j_before, a.j_after, a.delta_abs, a.delta_rel,
                  a.accepted ? 1 : 0);
    std::string note = a.note;
    for (char& c : note) {
      if (c == ',' || c == '\n') c = ';';
    }
    s += buf + note + "\n";
  }
  return s;
}

void write_outputs(const RunResult& result, const std::string& dir) {
  const ModelSettings& ms = result.config.model;
  const ElementField density =
      project_field(result.design, ms.tspec, ms.aspec, ms.grid, 0.0, ms.threads);
  const ElementField residual = residual_field(result.target, density);
  ElementField abs_res = residual;
  for (double& v : abs_res.values) v = std::abs(v);
  ElementField reward = density;
  for (size_t e = 0; e < reward.values.size(); ++e) {
    reward.values[e] *= result.target.values[e];
  }

  // Everything is rendered before the first file is touched.
  std::vector<std::pair<std::string, std::string>> files = {
      {"pills.csv", pills_to_csv(result.design)},
      {"density.csv", field_to_csv(density)},
      {"density.pgm", field_to_pgm(density)},
      {"residual.csv", field_to_csv(residual)},
      {"residual.pgm", field_to_pgm(residual, -1.0, 1.0)},
      {"abs_residual.csv", field_to_csv(abs_res)},
      {"abs_residual.pgm", field_to_pgm(abs_res)},
      {"reward.csv", field_to_csv(reward)},
      {"trace.csv", trace_to_csv(result.trace)},
      {"stages.csv", stages_to_csv(result.stages)},
      {"config.json", config_to_json(result.config)},
  };
  if (result.heuristics) {
    files.emplace_back("heuristics.csv", ratios_to_csv(result.heuristics->ratios));
  }
  if (result.refinement) {
    files.emplace_back("refine.csv", audit_to_csv(result.refinement->audit));
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": " + ec.message());
  for (const auto& [name, data] : files) {
    write_file((std::filesystem::path(dir) / name).string(), data);
  }
}

}  // namespace pillfit
