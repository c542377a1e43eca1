// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_AGGREGATION_HPP
#define PILLFIT_CORE_AGGREGATION_HPP

#include <span>
#include <string>
#include <variant>

#include <Eigen/Core>

namespace pillfit {

struct SumKind {};
struct PNormKind {
  double p = 7.0;
};
struct SoftmaxKind {
  double beta = 10.0;
};
struct SumSoftcapKind {
  double tau = 1.1;
  double beta_c = 18.0;
};
struct CosineKind {
  double n = 2.0;
};

// Combines per-pill densities at one point. The soft-cap inner map is the
// identity.
class AggregatorSpec {
 public:
  using Kind =
      std::variant<SumKind, PNormKind, SoftmaxKind, SumSoftcapKind, CosineKind>;

  AggregatorSpec();  // p-norm, p = 7
  explicit AggregatorSpec(Kind kind);

  static AggregatorSpec sum() { return AggregatorSpec(SumKind{}); }
  static AggregatorSpec pnorm(double p) { return AggregatorSpec(PNormKind{p}); }
  static AggregatorSpec softmax(double beta) {
    return AggregatorSpec(SoftmaxKind{beta});
  }
  static AggregatorSpec sum_softcap(double tau, double beta_c) {
    return AggregatorSpec(SumSoftcapKind{tau, beta_c});
  }
  static AggregatorSpec cosine(double n) {
    return AggregatorSpec(CosineKind{n});
  }

  const Kind& kind() const { return kind_; }
  // False only for Sum: off-diagonal pill blocks of the Hessian vanish.
  bool couples_features() const;
  std::string describe() const;

 private:
  Kind kind_;
};

struct AggPartials {
  double value = 0.0;
  Eigen::VectorXd d1;  // dA/drho_m
  Eigen::MatrixXd d2;  // d2A/drho_a drho_b, symmetric
};

inline constexpr double kPNormRhoFloor = 1e-12;

// Precondition: rho non-empty, entries in [0,1]. Throws std::invalid_argument
// on empty input.
double aggregate_value(const AggregatorSpec& spec, std::span<const double> rho);
AggPartials aggregate_partials(const AggregatorSpec& spec,
                               std::span<const double> rho);

// Same operators evaluated on a subset of nonzero entries plus n_zero further
// entries equal to zero; partials are returned for the listed entries only.
// Used by the grid assembly, where most pills vanish at a given point.
AggPartials aggregate_sparse(const AggregatorSpec& spec,
                             std::span<const double> rho, int n_zero,
                             bool want_d2);

// Value of the aggregate when all n inputs are zero.
double aggregate_of_zeros(const AggregatorSpec& spec, int n);

}  // namespace pillfit

#endif
