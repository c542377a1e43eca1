// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_SOLVER_HPP
#define PILLFIT_CORE_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "objective.hpp"

namespace pillfit {

enum class HessianMode { Exact, LBFGS };

struct SolveOptions {
  double tol = 1e-7;
  int max_iter = 100;
  HessianMode hessian_mode = HessianMode::Exact;
  int history = 3;  // LBFGS pairs
  double barrier_mu0 = 1e-3;
  int ls_max_backtracks = 30;
  // Caps the infinity norm of the first trial step; 0 disables the cap.
  double max_step = 0.0;
  std::uint64_t rng_seed = 0;  // reserved; the solver itself is deterministic

  void validate() const;
};

enum class Termination { Tolerance, MaxIter, LineSearchFailure };
const char* termination_name(Termination t);

// Minimize f(x) subject to lower <= x <= upper and g_i(x) <= 0.
// evaluate must fill grad/hess when the pointers are non-null; it may throw
// or return non-finite values at trial points, which are then rejected.
// admissible (optional) vetoes trial points outside f's domain.
struct SmoothProblem {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*,
                       Eigen::MatrixXd*)>
      evaluate;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<bool> fixed;  // coordinates excluded from the free set
  std::function<std::vector<ConstraintJet>(const Eigen::VectorXd&)>
      constraints;
  std::function<bool(const Eigen::VectorXd&)> admissible;
};

struct SolveResult {
  Eigen::VectorXd x;
  std::vector<double> objective_trace;  // one entry per accepted iterate
  std::vector<int> trace_evals;         // eval_count at each accepted iterate
  int eval_count = 0;
  int iterations = 0;
  Termination termination = Termination::MaxIter;
  bool feasible = true;
};

// Projected Newton / L-BFGS with log-barrier handling of the inequalities.
// Throws ValidationError if x0 is not strictly feasible for the
// inequalities, SolverError on non-finite values at an accepted point.
SolveResult minimize(const SmoothProblem& problem, const Eigen::VectorXd& x0,
                     const SolveOptions& opts);

}  // namespace pillfit

#endif
