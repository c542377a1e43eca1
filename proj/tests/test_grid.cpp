// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "error.hpp"
#include "fd.hpp"
#include "grid.hpp"

using namespace pillfit;
using doctest::Approx;

namespace {

GridSpec unit_element() {
  GridSpec g;
  g.nx = g.ny = 1;
  return g;
}

bool contains(const std::vector<Point2>& pts, double x, double y) {
  for (const Point2& p : pts) {
    if (std::abs(p.x - x) < 1e-14 && std::abs(p.y - y) < 1e-14) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("quadrature nodes on the unit element") {
  const GridSpec g = unit_element();
  const auto q1 = quad_points(g, 0, 1);
  REQUIRE(q1.size() == 1);
  CHECK(q1[0].x == 0.5);
  CHECK(q1[0].y == 0.5);

  const auto q2 = quad_points(g, 0, 2);
  REQUIRE(q2.size() == 4);
  for (double x : {0.0, 1.0})
    for (double y : {0.0, 1.0}) CHECK(contains(q2, x, y));

  const auto q3 = quad_points(g, 0, 3);
  REQUIRE(q3.size() == 9);
  for (double x : {0.0, 0.5, 1.0})
    for (double y : {0.0, 0.5, 1.0}) CHECK(contains(q3, x, y));
}

TEST_CASE("grid validation") {
  GridSpec g;
  g.nx = 0;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g = GridSpec{};
  g.quad_order = kMaxQuadOrder + 1;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g = GridSpec{};
  g.lx = -1;
  CHECK_THROWS_AS(g.validate(), ValidationError);
}

TEST_CASE("element covered by one pill is a plateau") {
  GridSpec g;
  g.nx = g.ny = 4;
  const DesignVector d({PillParams(0.1, 0.5, 0.9, 0.5, 0.35)});
  const ElementJet j =
      element_average_jet(d, TransitionSpec(), AggregatorSpec(), g, 1 + 4 * 1);
  CHECK(j.value == 1.0);
  CHECK(j.grad.isZero(0.0));
}

TEST_CASE("element with no pill in range") {
  GridSpec g;
  g.nx = g.ny = 10;
  const DesignVector d({PillParams(0.1, 0.1, 0.2, 0.1, 0.05)});
  const ElementJet j =
      element_average_jet(d, TransitionSpec(), AggregatorSpec::sum(), g, 99);
  CHECK(j.value == 0.0);
  CHECK(j.grad.size() == 0);
}

TEST_CASE("empty design projects to zero") {
  GridSpec g;
  g.nx = g.ny = 5;
  const ElementField f =
      project_field(DesignVector(), TransitionSpec(), AggregatorSpec(), g);
  for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("constant aggregate gives constant elements") {
  GridSpec g;
  g.nx = g.ny = 3;
  // Two large coincident pills: every node sees rho = (1, 1).
  const PillParams big(0.4, 0.5, 0.6, 0.5, 2.0);
  const DesignVector d({big, big});
  const ElementField f =
      project_field(d, TransitionSpec(), AggregatorSpec::sum(), g);
  for (double v : f.values) CHECK(v == Approx(2.0));
}

TEST_CASE("projected mass of one pill") {
  GridSpec g;
  g.nx = g.ny = 200;
  const double delta = 0.02;
  const TransitionSpec ts = TransitionSpec::smoothstep(3, delta);
  const double r = 0.1, len = 0.4;
  const DesignVector d({PillParams(0.3, 0.5, 0.3 + len, 0.5, r)});
  const ElementField f = project_field(d, ts, AggregatorSpec(), g);
  double mass = 0.0;
  for (double v : f.values) mass += v * g.cell_area();
  // Straight flanks cancel by symmetry of the ramp; the end caps add the
  // curvature term 2 pi * integral of s (phi(s) - [s < 0]) ds.
  double band = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double s = -delta + (k + 0.5) * 2 * delta / n;
    band += s * (ts.eval(s).value - (s < 0 ? 1.0 : 0.0)) * 2 * delta / n;
  }
  const double exact = 2 * r * len + std::numbers::pi * r * r +
                       2 * std::numbers::pi * band;
  CHECK(std::abs(mass - exact) / exact < 0.02);
}

TEST_CASE("element jet matches finite differences") {
  GridSpec g;
  g.nx = g.ny = 8;
  const TransitionSpec ts;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.3, 0.7);
  for (const AggregatorSpec& as :
       {AggregatorSpec(), AggregatorSpec::sum(), AggregatorSpec::softmax(10)}) {
    CAPTURE(as.describe());
    for (int trial = 0; trial < 5; ++trial) {
      const DesignVector d({PillParams(u(rng), u(rng), u(rng), u(rng), 0.08),
                            PillParams(u(rng), u(rng), u(rng), u(rng), 0.1)});
      const int e = 3 + 8 * 4;
      auto f = [&](const Eigen::VectorXd& z) {
        return element_average_jet(d.with_values(z), ts, as, g, e).value;
      };
      auto grad = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        return element_average_jet(d.with_values(z), ts, as, g, e)
            .dense_grad(2);
      };
      const ElementJet j = element_average_jet(d, ts, as, g, e);
      if (j.singular) continue;
      const Eigen::VectorXd z = d.to_vector();
      CHECK(test::rel_err(j.dense_grad(2), test::fd_gradient(f, z)) < 1e-5);
      CHECK(test::rel_err(j.dense_hess(2), test::fd_jacobian(grad, z)) < 1e-5);
    }
  }
}

TEST_CASE("threaded projection is identical") {
  GridSpec g;
  g.nx = 37;
  g.ny = 23;
  const DesignVector d({PillParams(0.1, 0.2, 0.8, 0.7, 0.1),
                        PillParams(0.2, 0.8, 0.7, 0.3, 0.06)});
  const ElementField a = project_field(d, TransitionSpec(), AggregatorSpec(), g);
  const ElementField b =
      project_field(d, TransitionSpec(), AggregatorSpec(), g, 0.0, 4);
  CHECK(a.values == b.values);
}

}
