// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "aggregation.hpp"
#include "doctest.h"
#include "fd.hpp"

using namespace pillfit;
using doctest::Approx;

namespace {

std::vector<double> as_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

TEST_SUITE("aggregation") {

TEST_CASE("single values") {
  const std::vector<double> one{0.7};
  CHECK(aggregate_value(AggregatorSpec::pnorm(3), one) == Approx(0.7));
  CHECK(aggregate_value(AggregatorSpec::pnorm(17), one) == Approx(0.7));
  const std::vector<double> two{0.5, 0.7};
  CHECK(aggregate_value(AggregatorSpec::sum(), two) == Approx(1.2));
}

TEST_CASE("softmax of equal inputs") {
  const std::vector<double> eq(4, 0.3);
  const AggregatorSpec s = AggregatorSpec::softmax(10);
  CHECK(aggregate_value(s, eq) == Approx(0.3 + std::log(4.0) / 10));
  const AggPartials p = aggregate_partials(s, eq);
  for (int i = 0; i < 4; ++i) CHECK(p.d1[i] == Approx(0.25));
}

TEST_CASE("soft cap and cosine shapes") {
  const AggregatorSpec cap = AggregatorSpec::sum_softcap(1.1, 18);
  const std::vector<double> at_tau{0.6, 0.5};
  CHECK(aggregate_value(cap, at_tau) == Approx(1.1 - std::log(2.0) / 18));

  const AggregatorSpec cos2 = AggregatorSpec::cosine(2);
  CHECK(aggregate_value(cos2, std::vector<double>{1.0}) == Approx(1.0));
  CHECK(aggregate_value(cos2, std::vector<double>{1.0, 1.0, 0.5}) ==
        Approx(0.5));
  const AggregatorSpec cos3 = AggregatorSpec::cosine(3);
  CHECK(aggregate_value(cos3, std::vector<double>{1.0, 1.0, 1.0}) ==
        Approx(1.0 - 4.0 / 2.0));
}

TEST_CASE("sum partials are constant") {
  const std::vector<double> r{0.1, 0.5, 0.9};
  const AggPartials p = aggregate_partials(AggregatorSpec::sum(), r);
  CHECK(p.d1.isOnes());
  CHECK(p.d2.isZero(0.0));
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(aggregate_partials(AggregatorSpec(), {}),
                  std::invalid_argument);
}

TEST_CASE("softmax sandwich and partition of unity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 7;
    std::vector<double> r(n);
    for (double& v : r) v = u(rng);
    const double beta = 5 + 20 * u(rng);
    const AggPartials p = aggregate_partials(AggregatorSpec::softmax(beta), r);
    const double mx = *std::max_element(r.begin(), r.end());
    CHECK(p.value >= mx - 1e-15);
    CHECK(p.value <= mx + std::log(n) / beta + 1e-15);
    CHECK(std::abs(p.d1.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("large p approaches the maximum") {
  const std::vector<double> r{0.2, 0.5, 0.8, 0.3};
  CHECK(std::abs(aggregate_value(AggregatorSpec::pnorm(1024), r) - 0.8) < 1e-2);
}

TEST_CASE("partials match finite differences") {
  std::mt19937_64 rng(5);
  // Sums stay below the soft cap's saturated regime, where FD noise dominates.
  std::uniform_real_distribution<double> u(0.05, 0.45);
  for (const AggregatorSpec& spec :
       {AggregatorSpec::sum(), AggregatorSpec::pnorm(7),
        AggregatorSpec::softmax(10), AggregatorSpec::sum_softcap(1.1, 18),
        AggregatorSpec::cosine(2)}) {
    CAPTURE(spec.describe());
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd x(3);
      for (int i = 0; i < 3; ++i) x[i] = u(rng);
      if (std::holds_alternative<CosineKind>(spec.kind()) &&
          (std::abs(x.sum() - 1) < 1e-3 || std::abs(x.sum() - 2) < 1e-3)) {
        continue;
      }
      auto f = [&](const Eigen::VectorXd& v) {
        return aggregate_value(spec, as_vec(v));
      };
      auto g = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return aggregate_partials(spec, as_vec(v)).d1;
      };
      const AggPartials p = aggregate_partials(spec, as_vec(x));
      CHECK(test::rel_err(p.d1, test::fd_gradient(f, x)) < 1e-6);
      CHECK(test::rel_err(p.d2, test::fd_jacobian(g, x)) < 1e-6);
    }
  }
}

TEST_CASE("sparse evaluation agrees with dense") {
  const std::vector<double> dense{0.4, 0.0, 0.7, 0.0};
  const std::vector<double> sparse{0.4, 0.7};
  for (const AggregatorSpec& spec :
       {AggregatorSpec::pnorm(7), AggregatorSpec::softmax(10),
        AggregatorSpec::sum_softcap(1.1, 18), AggregatorSpec::cosine(2)}) {
    CAPTURE(spec.describe());
    const AggPartials d = aggregate_partials(spec, dense);
    const AggPartials s = aggregate_sparse(spec, sparse, 2, true);
    CHECK(s.value == Approx(d.value));
    CHECK(s.d1[0] == Approx(d.d1[0]));
    CHECK(s.d1[1] == Approx(d.d1[2]));
    CHECK(s.d2(0, 1) == Approx(d.d2(0, 2)));
  }
}

}
