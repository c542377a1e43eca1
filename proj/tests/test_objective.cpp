// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "fd.hpp"
#include "io.hpp"
#include "objective.hpp"

using namespace pillfit;
using doctest::Approx;

namespace {

struct Setup {
  GridSpec grid;
  TransitionSpec ts;
  AggregatorSpec as;
  DesignVector design;
  Setup() {
    grid.nx = grid.ny = 12;
    // Generic coordinates keep quadrature nodes off the endpoint rays.
    design = DesignVector({PillParams(0.213, 0.307, 0.691, 0.618, 0.1),
                           PillParams(0.322, 0.787, 0.809, 0.361, 0.07),
                           PillParams(0.563, 0.211, 0.607, 0.742, 0.08)});
  }
};

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("perfect fit") {
  Setup s;
  const ElementField target = project_field(s.design, s.ts, s.as, s.grid);
  const ObjectiveJet j = tracking_jet(s.design, s.ts, s.as, s.grid, target);
  CHECK(j.value == Approx(0.0));
  CHECK(j.grad.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("zero target reduces to the sum of squares") {
  Setup s;
  const ElementField zero(s.grid.nx, s.grid.ny);
  const ElementField rho = project_field(s.design, s.ts, s.as, s.grid);
  double sq = 0.0;
  for (double v : rho.values) sq += v * v;
  CHECK(tracking_jet(s.design, s.ts, s.as, s.grid, zero).value == Approx(sq));

  const ObjectiveJet r = reward_jet(s.design, s.ts, s.as, s.grid, zero);
  CHECK(r.value == 0.0);
  CHECK(r.grad.isZero(0.0));
}

TEST_CASE("two-element toy") {
  // One pill straddling both elements of a 2x1 grid symmetrically.
  GridSpec g;
  g.nx = 2;
  g.ny = 1;
  g.quad_order = 1;
  const TransitionSpec ts;
  const AggregatorSpec as = AggregatorSpec::sum();
  // Midpoints at x = 0.25 and 0.75; the pill's boundary passes through both.
  const DesignVector d({PillParams(0.5, -1.0, 0.5, 2.0, 0.25)});
  ElementField target(2, 1);
  target.at(0, 0) = 1.0;
  const ElementField rho = project_field(d, ts, as, g);
  REQUIRE(rho.at(0, 0) == Approx(0.5));
  REQUIRE(rho.at(1, 0) == Approx(0.5));
  CHECK(tracking_jet(d, ts, as, g, target).value == Approx(0.5));
}

TEST_CASE("full overlap reward") {
  GridSpec g;
  g.nx = g.ny = 4;
  const DesignVector d({PillParams(0.5, 0.45, 0.5, 0.55, 1.0)});
  ElementField target(4, 4);
  int m = 0;
  for (int i = 0; i < 4; ++i) {
    target.at(i, 1) = 1.0;
    ++m;
  }
  const ObjectiveJet r =
      reward_jet(d, TransitionSpec(), AggregatorSpec::sum(), g, target);
  CHECK(r.value == Approx(-m));
}

TEST_CASE("jets match finite differences") {
  Setup s;
  ElementField target(s.grid.nx, s.grid.ny);
  for (int k = 0; k < s.grid.element_count(); ++k) {
    target.values[k] = 0.5 + 0.4 * std::sin(1.7 * k);
  }
  for (ObjectiveKind kind : {ObjectiveKind::Tracking, ObjectiveKind::Reward}) {
    CAPTURE(objective_name(kind));
    ObjectiveContext ctx;
    ctx.kind = kind;
    ctx.tspec = &s.ts;
    ctx.aspec = &s.as;
    ctx.grid = &s.grid;
    ctx.target = &target;
    auto f = [&](const Eigen::VectorXd& z) {
      return objective_value(ctx, s.design.with_values(z));
    };
    auto grad = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
      return objective_jet(ctx, s.design.with_values(z), 1).grad;
    };
    const ObjectiveJet j = objective_jet(ctx, s.design, 2);
    const Eigen::VectorXd z = s.design.to_vector();
    CHECK(j.value == Approx(f(z)));
    CHECK(test::rel_err(j.grad, test::fd_gradient(f, z)) < 1e-5);
    CHECK(test::rel_err(j.hess, test::fd_jacobian(grad, z)) < 1e-5);
  }
}

TEST_CASE("mask restricts the sum") {
  Setup s;
  const ElementField target(s.grid.nx, s.grid.ny, 1.0);
  ElementField mask(s.grid.nx, s.grid.ny);
  ObjectiveContext ctx;
  ctx.tspec = &s.ts;
  ctx.aspec = &s.as;
  ctx.grid = &s.grid;
  ctx.target = &target;
  ctx.element_mask = &mask;
  CHECK(objective_value(ctx, s.design) == 0.0);
  mask.at(3, 4) = 1.0;
  const ElementField rho = project_field(s.design, s.ts, s.as, s.grid);
  const double e = 1.0 - rho.at(3, 4);
  CHECK(objective_value(ctx, s.design) == Approx(e * e));
}

TEST_CASE("length constraint values") {
  const auto lo = length_constraint_jet(PillParams(0, 0, 0.1, 0, 0.05), 0.05,
                                        std::nullopt);
  REQUIRE(lo.size() == 1);
  CHECK(lo[0].value == Approx(-0.0075));
  const auto at = length_constraint_jet(PillParams(0, 0, 0.05, 0, 0.05), 0.05,
                                        std::nullopt);
  CHECK(std::abs(at[0].value) < 1e-15);
  const auto both =
      length_constraint_jet(PillParams(0, 0, 0.1, 0, 0.05), 0.05, 0.2);
  CHECK(both.size() == 2);
  CHECK(both[1].value == Approx(0.01 - 0.04));
}

TEST_CASE("length constraint gradient") {
  const PillParams pill(0.1, 0.2, 0.7, 0.5, 0.05);
  const ConstraintJet c = length_constraint_jet(pill, 0.05, std::nullopt)[0];
  const Vec5 z = pill.to_vector();
  auto g = [&](const Eigen::VectorXd& v) {
    const double dx = v[2] - v[0], dy = v[3] - v[1];
    return 0.05 * 0.05 - (dx * dx + dy * dy);
  };
  const Eigen::VectorXd fd = test::fd_gradient(g, z);
  for (size_t k = 0; k < c.idx.size(); ++k) {
    CHECK(std::abs(c.grad[k] - fd[c.idx[k]]) < 1e-9);
  }
  CHECK(c.grad[0] == Approx(2 * (0.7 - 0.1)));
}

TEST_CASE("residual mask is strict") {
  ElementField t(2, 1), c(2, 1);
  t.values = {0.5, 0.75};
  c.values = {0.25, 0.25};
  const ElementField m = residual_mask(t, c, 0.25);
  CHECK(m.values[0] == 0.0);
  CHECK(m.values[1] == 1.0);
}

}
