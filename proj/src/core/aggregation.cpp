// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "error.hpp"

namespace pillfit {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Scalar3 {
  double v, d1, d2;
};

Scalar3 softcap(const SumSoftcapKind& k, double s) {
  const double c1 = sigmoid(k.beta_c * (k.tau - s));
  return {k.tau - softplus(k.beta_c * (k.tau - s)) / k.beta_c, c1,
          -k.beta_c * c1 * (1.0 - c1)};
}

Scalar3 cosine_shape(const CosineKind& k, double s) {
  constexpr double pi = std::numbers::pi;
  const double a = 1.0 - (k.n - 1.0) * (k.n - 1.0) / 2.0;
  if (s <= 1.0) {
    const double w = 0.5 * pi;
    return {std::sin(w * s), w * std::cos(w * s), -w * w * std::sin(w * s)};
  }
  if (s < k.n) {
    const double c = pi / (k.n - 1.0);
    const double arg = c * (s - 1.0);
    return {a + (1.0 - a) * 0.5 * (1.0 + std::cos(arg)),
            -(1.0 - a) * 0.5 * c * std::sin(arg),
            -(1.0 - a) * 0.5 * c * c * std::cos(arg)};
  }
  return {a, 0.0, 0.0};
}

// Operators whose partials only depend on s = sum(rho): every d1 entry is
// A'(s) and every d2 entry is A''(s).
AggPartials from_sum_shape(Scalar3 f, Eigen::Index n, bool want_d2) {
  AggPartials out;
  out.value = f.v;
  out.d1 = Eigen::VectorXd::Constant(n, f.d1);
  if (want_d2) out.d2 = Eigen::MatrixXd::Constant(n, n, f.d2);
  return out;
}

}  // namespace

AggregatorSpec::AggregatorSpec() : AggregatorSpec(PNormKind{7.0}) {}

AggregatorSpec::AggregatorSpec(Kind kind) : kind_(kind) {
  if (const auto* p = std::get_if<PNormKind>(&kind_)) {
    if (!(p->p > 1.0)) throw ValidationError("p-norm requires p > 1");
  } else if (const auto* s = std::get_if<SoftmaxKind>(&kind_)) {
    if (!(s->beta > 0.0)) throw ValidationError("softmax requires beta > 0");
  } else if (const auto* c = std::get_if<SumSoftcapKind>(&kind_)) {
    if (!(c->tau > 0.0) || !(c->beta_c > 0.0)) {
      throw ValidationError("sum-softcap requires tau > 0 and beta_c > 0");
    }
  } else if (const auto* c = std::get_if<CosineKind>(&kind_)) {
    if (!(c->n > 1.0)) throw ValidationError("cosine shaping requires N > 1");
  }
}

bool AggregatorSpec::couples_features() const {
  return !std::holds_alternative<SumKind>(kind_);
}

std::string AggregatorSpec::describe() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SumKind>) {
          os << "sum";
        } else if constexpr (std::is_same_v<T, PNormKind>) {
          os << "pnorm(p=" << k.p << ")";
        } else if constexpr (std::is_same_v<T, SoftmaxKind>) {
          os << "softmax(beta=" << k.beta << ")";
        } else if constexpr (std::is_same_v<T, SumSoftcapKind>) {
          os << "sum_softcap(tau=" << k.tau << ", beta_c=" << k.beta_c << ")";
        } else {
          os << "cosine(N=" << k.n << ")";
        }
      },
      kind_);
  return os.str();
}

AggPartials aggregate_sparse(const AggregatorSpec& spec,
                             std::span<const double> rho, int n_zero,
                             bool want_d2) {
  const auto n = static_cast<Eigen::Index>(rho.size());
  double sum = 0.0;
  for (double r : rho) sum += r;

  return std::visit(
      [&](const auto& k) -> AggPartials {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SumKind>) {
          AggPartials out;
          out.value = sum;
          out.d1 = Eigen::VectorXd::Ones(n);
          if (want_d2) out.d2 = Eigen::MatrixXd::Zero(n, n);
          return out;
        } else if constexpr (std::is_same_v<T, PNormKind>) {
          // Normalized by the largest entry; w_a = rho_a^p / S.
          AggPartials out;
          out.d1.resize(n);
          if (want_d2) out.d2.resize(n, n);
          if (n == 0) return out;
          Eigen::VectorXd r(n);
          for (Eigen::Index a = 0; a < n; ++a) {
            r[a] = std::max(rho[a], kPNormRhoFloor);
          }
          const double rmax = r.maxCoeff();
          Eigen::VectorXd w(n);
          double s_true = 0.0;
          for (Eigen::Index a = 0; a < n; ++a) {
            w[a] = std::pow(r[a] / rmax, k.p);
            s_true += rho[a] > 0.0 ? std::pow(rho[a] / rmax, k.p) : 0.0;
          }
          const double s = w.sum();
          w /= s;
          const double a_clamped = rmax * std::pow(s, 1.0 / k.p);
          out.value = rmax * std::pow(s_true, 1.0 / k.p);
          for (Eigen::Index a = 0; a < n; ++a) {
            out.d1[a] = a_clamped * w[a] / r[a];
          }
          if (want_d2) {
            for (Eigen::Index a = 0; a < n; ++a) {
              for (Eigen::Index b = a; b < n; ++b) {
                const double delta_ab = (a == b) ? w[a] : 0.0;
                const double v =
                    (k.p - 1.0) * a_clamped / (r[a] * r[b]) * (delta_ab - w[a] * w[b]);
                out.d2(a, b) = v;
                out.d2(b, a) = v;
              }
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, SoftmaxKind>) {
          AggPartials out;
          double m = n_zero > 0 ? 0.0 : -std::numeric_limits<double>::infinity();
          for (double r : rho) m = std::max(m, r);
          Eigen::VectorXd w(n);
          double s = n_zero * std::exp(-k.beta * m);
          for (Eigen::Index a = 0; a < n; ++a) {
            w[a] = std::exp(k.beta * (rho[a] - m));
            s += w[a];
          }
          w /= s;
          out.value = m + std::log(s) / k.beta;
          out.d1 = w;
          if (want_d2) {
            out.d2 = -k.beta * (w * w.transpose());
            out.d2.diagonal() += k.beta * w;
          }
          return out;
        } else if constexpr (std::is_same_v<T, SumSoftcapKind>) {
          return from_sum_shape(softcap(k, sum), n, want_d2);
        } else {
          return from_sum_shape(cosine_shape(k, sum), n, want_d2);
        }
      },
      spec.kind());
}

double aggregate_of_zeros(const AggregatorSpec& spec, int n) {
  return aggregate_sparse(spec, {}, n, false).value;
}

AggPartials aggregate_partials(const AggregatorSpec& spec,
                               std::span<const double> rho) {
  if (rho.empty()) {
    throw std::invalid_argument("aggregation of an empty input");
  }
  return aggregate_sparse(spec, rho, 0, true);
}

double aggregate_value(const AggregatorSpec& spec,
                       std::span<const double> rho) {
  if (rho.empty()) {
    throw std::invalid_argument("aggregation of an empty input");
  }
  return aggregate_sparse(spec, rho, 0, false).value;
}

}  // namespace pillfit
