// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_RUN_HPP
#define PILLFIT_CORE_RUN_HPP

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "study.hpp"

namespace pillfit {

// Loads or rasterizes the target and fixes the grid size. A target file
// defines nx, ny unless the config gave them, in which case they must match.
ElementField resolve_target(RunConfig& cfg);

DesignVector make_init(const RunConfig& cfg);

struct RunResult {
  RunConfig config;  // with the grid size resolved
  ElementField target;
  DesignVector design;
  std::vector<TraceRow> trace;
  std::vector<StageReport> stages;
  std::optional<HeuristicsReport> heuristics;
  std::optional<RefineResult> refinement;
  double objective = 0.0;       // final tracking value, ext 0
  double objective_norm = 0.0;  // per element
};

// Staged run, then heuristics and refinement if enabled.
RunResult run_pipeline(const RunConfig& cfg, const ElementField& target,
                       const DesignVector& init);

// Writes pills.csv, density.csv/.pgm, residual.csv/.pgm, abs_residual.csv/.pgm,
// reward.csv, trace.csv, stages.csv, config.json, plus heuristics.csv and
// refine.csv when those ran. Creates dir if needed.
void write_outputs(const RunResult& result, const std::string& dir);

// One of the Ch. 8 sweeps over the config's model: "resolution",
// "quadrature", "hessian" or "count". Truth is target.pills if given, else
// the synthetic five-bar.
std::vector<StudyRow> run_study(const RunConfig& cfg, const std::string& kind);

std::string stages_to_csv(const std::vector<StageReport>& stages);
std::string ratios_to_csv(const AreaRatios& ratios);
std::string audit_to_csv(const std::vector<RefineAudit>& audit);

}  // namespace pillfit

#endif
