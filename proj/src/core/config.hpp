// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_CONFIG_HPP
#define PILLFIT_CORE_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "io.hpp"
#include "pipeline.hpp"

namespace pillfit {

struct TargetSource {
  std::string path;  // empty: use pills or the synthetic five-bar
  FieldFormat format = FieldFormat::Auto;
  std::optional<DesignVector> pills;
  bool five_bar = false;
};

enum class InitMode { Cross, RandomizedCross, Pills };

struct InitConfig {
  InitMode mode = InitMode::Cross;
  int n = 8;
  double r0 = 0.05;
  double theta_max = 0.0;  // degrees
  std::string pills_path;  // mode Pills
};

struct StudyConfig {
  std::vector<std::pair<int, int>> resolutions{{40, 20}, {80, 40}, {120, 60}};
  std::vector<int> orders{1, 2, 3, 4, 5};
  int quadrature_nx = 80;
  int quadrature_ny = 40;
  std::vector<int> counts{3, 4, 5, 8, 13, 18};
  int pills = 8;
  int history = 3;
};

struct RunConfig {
  ModelSettings model;
  // False: nx, ny come from the target file.
  bool grid_size_explicit = true;
  std::vector<StageConfig> stages;
  InitConfig init;
  bool heuristics_enabled = false;
  bool heuristics_reconverge = true;
  HeuristicConfig heuristics;
  bool refinement_enabled = false;
  RefinementConfig refinement;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  TargetSource target;
  StudyConfig study;

  // Five-bar settings, default stages, cross init with 8 pills.
  RunConfig();
  void validate() const;
};

// Unknown keys and malformed values throw ValidationError naming the key.
RunConfig parse_config(const std::string& json_text, const std::string& source);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg);

}  // namespace pillfit

#endif
