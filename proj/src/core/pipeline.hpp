// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_PIPELINE_HPP
#define PILLFIT_CORE_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "objective.hpp"
#include "solver.hpp"

namespace pillfit {

// Discretization, model and solver settings shared by every stage.
struct ModelSettings {
  GridSpec grid;
  TransitionSpec tspec;
  AggregatorSpec aspec;
  ConstraintSet constraints;
  SolveOptions solver;
  int threads = 1;
};

struct StageConfig {
  std::string name = "stage";
  ObjectiveKind objective = ObjectiveKind::Tracking;
  double ext = 0.0;
  double tol = 1e-7;
  int max_iter = 100;
  bool radius_frozen = false;
  // Radius assigned to every pill before the stage starts (implies nothing
  // about freezing).
  std::optional<double> fixed_radius;
  std::optional<TransitionSpec> tspec;
  std::optional<AggregatorSpec> aspec;
};

// Exploration (reward, ext 0.2, r frozen at 0.05) -> bridging (tracking,
// ext 0.1) -> convergence (tracking, ext 0).
std::vector<StageConfig> default_stages();

enum class Proximity { CenterDistance, SegmentDistance };

struct HeuristicConfig {
  double ar_min = 0.15;
  double ur_min = 1e-4;
  double theta_lim = 10.0;  // degrees
  double d_min = 0.15;
  Proximity proximity = Proximity::CenterDistance;
  void validate() const;
};

struct RefinementConfig {
  double tau_res = 0.2;
  double r_seed = 0.05;
  std::optional<double> fixed_r;
  int k_max = 5;
  double eps_abs = 0.0;
  double eps_rel = 1e-3;
  void validate() const;
};

// ---- initialization ----

// Cell layout with 2*rows*cols >= n and cells as square as possible.
std::pair<int, int> cross_layout(int n, double lx, double ly);

DesignVector cross_init(int rows, int cols, int n, double r0,
                        std::optional<double> l_max, const ConstraintSet& cs);
DesignVector randomized_cross_init(int rows, int cols, int n, double r0,
                                   std::optional<double> l_max,
                                   const ConstraintSet& cs, double theta_max,
                                   std::uint64_t seed);

// Clamps radii, lengthens segments shorter than l_min (about their center)
// and translates/clips endpoints into the box.
DesignVector make_feasible(const DesignVector& design, const ConstraintSet& cs);

// ---- staged optimization ----

struct TraceRow {
  int eval_index = 0;
  double objective = 0.0;
  std::string stage;
};

struct StageReport {
  std::string name;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  bool accepted = true;
  int iterations = 0;
  int evals = 0;
  std::string termination;
  std::string error;  // solver failure message, if any
};

struct StagedResult {
  DesignVector design;
  std::vector<TraceRow> trace;
  std::vector<StageReport> stages;
  int eval_count = 0;
};

struct StageResult {
  DesignVector design;
  StageReport report;
  SolveResult solve;
};

// One stage on its own. mask (optional) restricts the objective sum.
StageResult run_stage(const ElementField& target, const DesignVector& init,
                      const StageConfig& stage, const ModelSettings& ms,
                      const ElementField* mask = nullptr);

StagedResult run_staged(const ElementField& target, const DesignVector& init,
                        const std::vector<StageConfig>& stages,
                        const ModelSettings& ms);

// ---- heuristics ----

struct AreaRatios {
  std::vector<double> ar;
  std::vector<double> ur;
  std::vector<double> area;
};

AreaRatios area_uniqueness_ratios(const DesignVector& design,
                                  const TransitionSpec& tspec,
                                  const GridSpec& grid);

// Survivors in original order; may be empty.
DesignVector prune(const DesignVector& design, const AreaRatios& ratios,
                   const HeuristicConfig& cfg);

DesignVector group_merge(const DesignVector& design,
                         const HeuristicConfig& cfg);

struct HeuristicsReport {
  AreaRatios ratios;
  DesignVector pruned;
  DesignVector merged;
  bool restored = false;  // prune emptied the design; best AR pill kept
};

HeuristicsReport apply_heuristics(const DesignVector& design,
                                  const ModelSettings& ms,
                                  const HeuristicConfig& cfg);

// ---- refinement ----

struct RefineAudit {
  int step = 0;
  Point2 centroid;
  int mask_elements = 0;
  double j_before = 0.0;
  double j_after = 0.0;
  double delta_abs = 0.0;
  double delta_rel = 0.0;
  bool accepted = false;
  std::string note;
};

struct RefineResult {
  DesignVector design;
  std::vector<RefineAudit> audit;
  std::string stop_reason;
  std::vector<TraceRow> trace;
};

// stages: the first entry is used for orientation (reward on the mask, radius
// frozen), the last one for the mask-restricted and joint convergence.
RefineResult refine_loop(const ElementField& target, const DesignVector& design,
                         const RefinementConfig& rcfg,
                         const std::vector<StageConfig>& stages,
                         const ModelSettings& ms);

// Mean squared error per element of the tracking functional (ext 0).
double tracking_mse(const ElementField& target, const DesignVector& design,
                    const ModelSettings& ms);

}  // namespace pillfit

#endif
