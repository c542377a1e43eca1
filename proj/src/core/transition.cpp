// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "transition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace pillfit {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

// Horner evaluation of the j-th derivative of sum_i c_i t^i.
double horner_derivative(const std::vector<double>& c, double t, int j) {
  const int deg = static_cast<int>(c.size()) - 1;
  if (j > deg) return 0.0;
  double acc = 0.0;
  for (int i = deg; i >= j; --i) {
    double falling = 1.0;
    for (int s = 0; s < j; ++s) falling *= (i - s);
    acc = acc * t + c[i] * falling;
  }
  return acc;
}

}  // namespace

double SmoothstepPoly::value(double t) const {
  return horner_derivative(coeffs, t, 0);
}
double SmoothstepPoly::d1(double t) const {
  return horner_derivative(coeffs, t, 1);
}
double SmoothstepPoly::d2(double t) const {
  return horner_derivative(coeffs, t, 2);
}
double SmoothstepPoly::derivative(double t, int j) const {
  return horner_derivative(coeffs, t, j);
}

SmoothstepPoly smoothstep_coeffs(int k) {
  if (k < 0 || k > kMaxSmoothstepOrder) {
    throw ValidationError("smoothstep order k must be in [0, " +
                          std::to_string(kMaxSmoothstepOrder) + "], got " +
                          std::to_string(k));
  }
  SmoothstepPoly poly;
  poly.k = k;
  poly.coeffs.assign(2 * k + 2, 0.0);
  // p(t) = 1 - S_k(t), S_k the rising C^k smoothstep.
  poly.coeffs[0] = 1.0;
  for (int m = 0; m <= k; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    poly.coeffs[k + 1 + m] =
        -sign * binomial(k + m, m) * binomial(2 * k + 1, k - m);
  }
  return poly;
}

TransitionSpec::TransitionSpec() : TransitionSpec(SmoothstepKind{3}, 0.05) {}

TransitionSpec::TransitionSpec(Kind kind, double delta)
    : kind_(kind), delta_(delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ValidationError("transition half-width delta must be positive");
  }
  if (const auto* t = std::get_if<TanhKind>(&kind_)) {
    if (!(t->beta > 0.0)) throw ValidationError("tanh beta must be positive");
  } else if (const auto* s = std::get_if<SmoothstepKind>(&kind_)) {
    poly_ = smoothstep_coeffs(s->k);
  } else {
    const auto& a = std::get<AsymmetricKind>(kind_);
    if (!(a.ext >= 0.0)) throw ValidationError("asymmetric ext must be >= 0");
    poly_ = smoothstep_coeffs(a.k);
  }
}

TransitionSpec TransitionSpec::tanh(double beta, double delta) {
  return TransitionSpec(TanhKind{beta}, delta);
}
TransitionSpec TransitionSpec::smoothstep(int k, double delta) {
  return TransitionSpec(SmoothstepKind{k}, delta);
}
TransitionSpec TransitionSpec::asymmetric(int k, double ext, double delta) {
  return TransitionSpec(AsymmetricKind{k, ext}, delta);
}

double TransitionSpec::support_lo() const {
  if (std::holds_alternative<AsymmetricKind>(kind_)) return -0.5 * delta_;
  return -delta_;
}

double TransitionSpec::support_hi() const {
  if (const auto* a = std::get_if<AsymmetricKind>(&kind_)) {
    return 0.5 * delta_ + a->ext;
  }
  return delta_;
}

TransitionJet TransitionSpec::eval(double d) const {
  TransitionJet jet;
  if (d <= support_lo()) {
    jet.value = 1.0;
    return jet;
  }
  if (d >= support_hi()) return jet;

  if (const auto* t = std::get_if<TanhKind>(&kind_)) {
    const double xi = t->beta * d / delta_;
    const double th = std::tanh(xi);
    const double sech2 = 1.0 - th * th;
    jet.value = 0.5 * (1.0 - th);
    jet.d1 = -t->beta / (2.0 * delta_) * sech2;
    jet.d2 = (t->beta / delta_) * (t->beta / delta_) * sech2 * th;
    return jet;
  }

  // Smoothstep core; the asymmetric variant uses half-width h inside the
  // pill and h + ext outside, meeting at t = 1/2 on the boundary.
  double w = delta_;
  if (const auto* a = std::get_if<AsymmetricKind>(&kind_)) {
    w = d <= 0.0 ? 0.5 * delta_ : 0.5 * delta_ + a->ext;
  }
  const double t = (d + w) / (2.0 * w);
  jet.value = poly_.value(t);
  jet.d1 = poly_.d1(t) / (2.0 * w);
  jet.d2 = poly_.d2(t) / (4.0 * w * w);
  // Guard the rounding tail of the polynomial near the plateaus.
  jet.value = std::clamp(jet.value, 0.0, 1.0);
  return jet;
}

std::string TransitionSpec::describe() const {
  std::ostringstream os;
  if (const auto* t = std::get_if<TanhKind>(&kind_)) {
    os << "tanh(beta=" << t->beta << ")";
  } else if (const auto* s = std::get_if<SmoothstepKind>(&kind_)) {
    os << "smoothstep(k=" << s->k << ")";
  } else {
    const auto& a = std::get<AsymmetricKind>(kind_);
    os << "asymmetric(k=" << a.k << ", ext=" << a.ext << ")";
  }
  os << " delta=" << delta_;
  return os.str();
}

PillJet pseudo_density_jet(const TransitionSpec& spec, const PillParams& pill,
                           Point2 x, double ext, double eps_sing) {
  PillJet out;
  const double r_eff = pill.r() + ext;
  const double d_unsigned = unsigned_distance(x, pill);
  const double d = d_unsigned - r_eff;
  if (d <= spec.support_lo()) {
    out.value = 1.0;
    return out;
  }
  if (d >= spec.support_hi()) return out;

  const DistanceJet dj = distance_jet(x, pill, /*is_signed=*/false, eps_sing);
  const TransitionJet tj = spec.eval(d);
  Vec5 grad_d = dj.grad;
  grad_d[kR] = -1.0;  // d/dr (d - r - ext); the distance Hessian has no r row.
  out.value = tj.value;
  out.grad = tj.d1 * grad_d;
  out.hess = tj.d2 * grad_d * grad_d.transpose() + tj.d1 * dj.hess;
  out.singular = dj.singular;
  out.in_band = true;
  return out;
}

double pseudo_density(const TransitionSpec& spec, const PillParams& pill,
                      Point2 x, double ext) {
  return spec.eval(unsigned_distance(x, pill) - pill.r() - ext).value;
}

}  // namespace pillfit
