// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_GRADCHECK_HPP
#define PILLFIT_CORE_GRADCHECK_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aggregation.hpp"
#include "grid.hpp"
#include "transition.hpp"

namespace pillfit {

// Below this magnitude the error is effectively absolute. Central differences
// carry roundoff of a few 1e-11, which a 1e-6 relative tolerance
// can only resolve on entries of this size or larger.
inline constexpr double kRelErrFloor = 1e-4;

// max_i |analytic - fd| / max(|analytic|_inf, |fd|_inf, kRelErrFloor)
double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& fd);

struct DerivativeCheck {
  double grad_rel_err = 0.0;
  double hess_rel_err = 0.0;
  bool inactive = false;  // analytic gradient identically zero
};

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
using JetFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                                 Eigen::MatrixXd&)>;

// Gradient against central differences of the value, Hessian against
// central differences of the analytic gradient.
DerivativeCheck check_derivatives(const ValueFn& value, const JetFn& jet,
                                  const Eigen::VectorXd& x0, double step);

struct GradcheckEntry {
  std::string name;
  int samples = 0;
  int inactive = 0;
  double max_grad_rel_err = 0.0;
  double max_hess_rel_err = 0.0;
  double grad_tol = 1e-6;
  double hess_tol = 1e-4;
  bool passed() const {
    return max_grad_rel_err < grad_tol && max_hess_rel_err < hess_tol;
  }
};

// Module-by-module report: distance jet, pseudo-density jet, element jet
// (n = 2), tracking and reward (n = 3), `samples` draws each.
std::vector<GradcheckEntry> gradcheck_suite(const TransitionSpec& tspec,
                                            const AggregatorSpec& aspec,
                                            int samples, std::uint64_t seed);

}  // namespace pillfit

#endif
