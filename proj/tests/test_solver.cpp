// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "doctest.h"
#include "error.hpp"
#include "solver.hpp"

using namespace pillfit;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// f = 1/2 x'Ax - b'x with a fixed SPD matrix.
SmoothProblem quadratic(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  SmoothProblem p;
  p.dim = static_cast<int>(b.size());
  p.lower = Eigen::VectorXd::Constant(p.dim, -kInf);
  p.upper = Eigen::VectorXd::Constant(p.dim, kInf);
  p.evaluate = [a, b](const Eigen::VectorXd& x, Eigen::VectorXd* g,
                      Eigen::MatrixXd* h) {
    if (g) *g = a * x - b;
    if (h) *h = a;
    return 0.5 * x.dot(a * x) - b.dot(x);
  };
  return p;
}

Eigen::MatrixXd spd5() {
  Eigen::MatrixXd m(5, 5);
  m << 4, 1, 0, 0, 0.5,  //
      1, 3, 0.2, 0, 0,   //
      0, 0.2, 2, 0.3, 0,  //
      0, 0, 0.3, 5, 1,   //
      0.5, 0, 0, 1, 6;
  return m;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("Newton is exact on a quadratic") {
  const Eigen::MatrixXd a = spd5();
  Eigen::VectorXd b(5);
  b << 1, -2, 0.5, 3, -1;
  const SmoothProblem p = quadratic(a, b);
  SolveOptions o;
  o.tol = 1e-12;
  const SolveResult r = minimize(p, Eigen::VectorXd::Zero(5), o);
  CHECK(r.iterations <= 2);
  CHECK((a * r.x - b).norm() < 1e-10);
}

TEST_CASE("L-BFGS converges on a quadratic") {
  const Eigen::MatrixXd a = spd5();
  Eigen::VectorXd b(5);
  b << 1, -2, 0.5, 3, -1;
  SolveOptions o;
  o.hessian_mode = HessianMode::LBFGS;
  o.tol = 1e-10;
  o.max_iter = 200;
  const SolveResult r = minimize(quadratic(a, b), Eigen::VectorXd::Zero(5), o);
  CHECK((a * r.x - b).norm() < 1e-5);
}

TEST_CASE("box constraints: solution on the face with KKT signs") {
  const Eigen::MatrixXd a = spd5();
  Eigen::VectorXd b(5);
  b << 10, -10, 0.5, 3, -1;
  SmoothProblem p = quadratic(a, b);
  p.lower = Eigen::VectorXd::Constant(5, -1.0);
  p.upper = Eigen::VectorXd::Constant(5, 1.0);
  SolveOptions o;
  o.tol = 1e-10;
  const SolveResult r = minimize(p, Eigen::VectorXd::Zero(5), o);
  const Eigen::VectorXd g = a * r.x - b;
  CHECK(r.x[0] == Approx(1.0));
  CHECK(r.x[1] == Approx(-1.0));
  for (int i = 0; i < 5; ++i) {
    CAPTURE(i);
    CHECK(r.x[i] >= -1.0);
    CHECK(r.x[i] <= 1.0);
    if (r.x[i] >= 1.0 - 1e-12) {
      CHECK(g[i] <= 1e-8);
    } else if (r.x[i] <= -1.0 + 1e-12) {
      CHECK(g[i] >= -1e-8);
    } else {
      CHECK(std::abs(g[i]) < 1e-6);
    }
  }
}

TEST_CASE("inequality constraint through the barrier") {
  // min (x0 - 2)^2 + (x1 - 1)^2  s.t.  x0 - 1 <= 0
  SmoothProblem p;
  p.dim = 2;
  p.lower = Eigen::VectorXd::Constant(2, -kInf);
  p.upper = Eigen::VectorXd::Constant(2, kInf);
  p.evaluate = [](const Eigen::VectorXd& x, Eigen::VectorXd* g,
                  Eigen::MatrixXd* h) {
    if (g) *g = Eigen::Vector2d(2 * (x[0] - 2), 2 * (x[1] - 1));
    if (h) *h = 2.0 * Eigen::Matrix2d::Identity();
    return (x[0] - 2) * (x[0] - 2) + (x[1] - 1) * (x[1] - 1);
  };
  p.constraints = [](const Eigen::VectorXd& x) {
    ConstraintJet c;
    c.value = x[0] - 1.0;
    c.idx = {0};
    c.grad = Eigen::VectorXd::Ones(1);
    c.hess = Eigen::MatrixXd::Zero(1, 1);
    return std::vector<ConstraintJet>{c};
  };
  SolveOptions o;
  o.tol = 1e-9;
  o.max_iter = 200;
  const SolveResult r = minimize(p, Eigen::Vector2d(0.0, 0.0), o);
  CHECK(r.feasible);
  CHECK(r.x[0] <= 1.0);
  CHECK(r.x[0] == Approx(1.0).epsilon(1e-3));
  CHECK(r.x[1] == Approx(1.0).epsilon(1e-6));
  for (size_t k = 1; k < r.objective_trace.size(); ++k) {
    CHECK(r.objective_trace[k] <= r.objective_trace[k - 1]);
  }
}

TEST_CASE("infeasible start is rejected") {
  SmoothProblem p = quadratic(Eigen::MatrixXd::Identity(1, 1),
                              Eigen::VectorXd::Zero(1));
  p.constraints = [](const Eigen::VectorXd& x) {
    ConstraintJet c;
    c.value = x[0] - 1.0;
    c.idx = {0};
    c.grad = Eigen::VectorXd::Ones(1);
    c.hess = Eigen::MatrixXd::Zero(1, 1);
    return std::vector<ConstraintJet>{c};
  };
  CHECK_THROWS_AS(minimize(p, Eigen::VectorXd::Constant(1, 2.0), SolveOptions{}),
                  ValidationError);
}

TEST_CASE("trace bookkeeping") {
  const Eigen::MatrixXd a = spd5();
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(5);
  SolveOptions o;
  o.hessian_mode = HessianMode::LBFGS;
  const SolveResult r = minimize(quadratic(a, b), Eigen::VectorXd::Zero(5), o);
  REQUIRE(r.objective_trace.size() == r.trace_evals.size());
  for (size_t k = 1; k < r.trace_evals.size(); ++k) {
    CHECK(r.trace_evals[k] > r.trace_evals[k - 1]);
    CHECK(r.objective_trace[k] <= r.objective_trace[k - 1]);
  }
  CHECK(r.trace_evals.back() <= r.eval_count);
}

TEST_CASE("option validation") {
  SolveOptions o;
  o.history = 0;
  o.hessian_mode = HessianMode::LBFGS;
  CHECK_THROWS_AS(o.validate(), ValidationError);
  o = SolveOptions{};
  o.tol = -1;
  CHECK_THROWS_AS(o.validate(), ValidationError);
}

}
