// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "error.hpp"
#include "fd.hpp"
#include "transition.hpp"

using namespace pillfit;
using doctest::Approx;

TEST_SUITE("transition") {

TEST_CASE("smoothstep k=2 coefficients") {
  const SmoothstepPoly p = smoothstep_coeffs(2);
  REQUIRE(p.coeffs.size() == 6);
  CHECK(p.coeffs[0] == 1.0);
  CHECK(p.coeffs[1] == 0.0);
  CHECK(p.coeffs[2] == 0.0);
  CHECK(p.coeffs[3] == -10.0);
  CHECK(p.coeffs[4] == 15.0);
  CHECK(p.coeffs[5] == -6.0);
}

TEST_CASE("smoothstep k=0 is the linear ramp") {
  const SmoothstepPoly p = smoothstep_coeffs(0);
  for (double t : {0.0, 0.25, 0.5, 0.9, 1.0}) CHECK(p.value(t) == Approx(1 - t));
}

TEST_CASE("smoothstep endpoint conditions") {
  for (int k = 0; k <= kMaxSmoothstepOrder; ++k) {
    CAPTURE(k);
    const SmoothstepPoly p = smoothstep_coeffs(k);
    CHECK(std::abs(p.value(0) - 1) < 1e-12);
    CHECK(std::abs(p.value(1)) < 1e-12);
    for (int j = 1; j <= k; ++j) {
      CHECK(std::abs(p.derivative(0, j)) < 1e-10);
      CHECK(std::abs(p.derivative(1, j)) < 1e-10);
    }
  }
  CHECK_THROWS_AS(smoothstep_coeffs(-1), ValidationError);
  CHECK_THROWS_AS(smoothstep_coeffs(kMaxSmoothstepOrder + 1), ValidationError);
}

TEST_CASE("transition values") {
  CHECK(TransitionSpec::smoothstep(2, 0.05).eval(0.0).value == Approx(0.5));
  const TransitionSpec s3 = TransitionSpec::smoothstep(3, 0.05);
  for (double d : {-0.05, 0.05}) {
    const TransitionJet j = s3.eval(d);
    CHECK(j.d1 == 0.0);
    CHECK(j.d2 == 0.0);
  }
  const TransitionJet t = TransitionSpec::tanh(8, 0.05).eval(0.0);
  CHECK(t.value == Approx(0.5));
  CHECK(t.d1 == Approx(-80.0));
}

TEST_CASE("tanh keeps a nonzero slope at the clip") {
  const TransitionSpec t = TransitionSpec::tanh(8, 0.05);
  const double edge = t.eval(0.05 - 1e-12).d1;
  const double expected = -8.0 / 0.1 / std::pow(std::cosh(8.0), 2);
  CHECK(edge != 0.0);
  CHECK(edge == Approx(expected).epsilon(1e-6));
}

TEST_CASE("asymmetric one-sided slopes") {
  const TransitionSpec a = TransitionSpec::asymmetric(2, 0.1, 0.1);
  const double inner = a.eval(-1e-14).d1;
  const double outer = a.eval(1e-14).d1;
  CHECK(inner / outer == Approx(3.0));
  CHECK(a.eval(-0.05).value == 1.0);
  CHECK(a.eval(0.15).value == 0.0);
}

TEST_CASE("pseudo-density plateaus") {
  const TransitionSpec spec;
  const PillParams pill(0.2, 0.5, 0.8, 0.5, 0.2);
  const PillJet in = pseudo_density_jet(spec, pill, {0.5, 0.5 + 0.05});
  CHECK(in.value == 1.0);
  CHECK(in.grad.isZero(0.0));
  CHECK(in.hess.isZero(0.0));
  const PillJet out = pseudo_density_jet(spec, pill, {0.5, 0.95});
  CHECK(out.value == 0.0);
  CHECK(out.grad.isZero(0.0));
}

TEST_CASE("pseudo-density jet matches finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const TransitionSpec& spec :
       {TransitionSpec(), TransitionSpec::tanh(8, 0.05),
        TransitionSpec::asymmetric(2, 0.05, 0.1)}) {
    CAPTURE(spec.describe());
    int checked = 0;
    while (checked < 30) {
      const PillParams pill(u(rng), u(rng), u(rng), u(rng), 0.1 + 0.1 * u(rng));
      const Point2 x{u(rng), u(rng)};
      const double d = signed_distance(x, pill);
      const double w = spec.support_hi() - spec.support_lo();
      if (d < spec.support_lo() + 0.05 * w || d > spec.support_hi() - 0.05 * w)
        continue;
      if (std::abs(d) < 1e-3 || unsigned_distance(x, pill) < 1e-2) continue;
      const Vec5 z = pill.to_vector();
      auto f = [&](const Eigen::VectorXd& v) {
        return pseudo_density(spec, PillParams::unchecked(v), x);
      };
      auto g = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return pseudo_density_jet(spec, PillParams::unchecked(v), x).grad;
      };
      const PillJet j = pseudo_density_jet(spec, pill, x);
      if (j.singular) continue;
      ++checked;
      CHECK(test::rel_err(j.grad, test::fd_gradient(f, z)) < 1e-5);
      CHECK(test::rel_err(j.hess, test::fd_jacobian(g, z)) < 1e-5);
    }
  }
}

}
