// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_STUDY_HPP
#define PILLFIT_CORE_STUDY_HPP

#include <string>
#include <vector>

#include "pipeline.hpp"

namespace pillfit {

// Synthetic five-bar truss on [0,2]x[0,1]: bottom chord, short top chord,
// two slanted sides and a central vertical.
DesignVector five_bar_pills();

// The 120x60 five-bar setting: grid, smoothstep k=3 with delta 0.05,
// l_min 0.05, 0.005 <= r <= 0.5, evaluation window padded by 0.1.
ModelSettings five_bar_settings();

// Targets are rasterized with this quadrature order regardless of the
// model's, so they stand in for exact element averages.
inline constexpr int kStudyTargetOrder = 8;

struct StudyCase {
  std::string label;
  ModelSettings settings;
  int pills = 8;
  int target_order = kStudyTargetOrder;  // 0: the model's own order
};

struct StudyRow {
  std::string label;
  int nx = 0;
  int ny = 0;
  int quad_order = 0;
  std::string hessian;
  int pills = 0;
  double objective = 0.0;       // final tracking value, ext 0
  double objective_norm = 0.0;  // divided by nx*ny
  // Final design scored with the target's quadrature order, so runs that
  // differ only in quadrature compare layouts rather than rules.
  double objective_ref = 0.0;
  int evals = 0;
  double seconds = 0.0;
};

// Each case: target rasterized from truth on the case's grid, cross init
// with the case's pill count, then the staged schedule.
StudyRow run_study_case(const StudyCase& c, const DesignVector& truth,
                        const std::vector<StageConfig>& stages);

std::vector<StudyCase> resolution_cases(const ModelSettings& base,
                                        const std::vector<std::pair<int, int>>& meshes,
                                        int pills);
std::vector<StudyCase> quadrature_cases(const ModelSettings& base,
                                        const std::vector<int>& orders,
                                        int pills);
std::vector<StudyCase> hessian_cases(const ModelSettings& base, int pills,
                                     int history);
std::vector<StudyCase> count_cases(const ModelSettings& base,
                                   const std::vector<int>& counts);

std::string study_to_csv(const std::vector<StudyRow>& rows);

// Cross init sized for the domain of cs.
DesignVector default_cross(int n, double r0, const ConstraintSet& cs);

}  // namespace pillfit

#endif
