// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_TRANSITION_HPP
#define PILLFIT_CORE_TRANSITION_HPP

#include <string>
#include <variant>
#include <vector>

#include "geometry.hpp"

namespace pillfit {

// Polynomial p on [0,1] with p(0)=1, p(1)=0 and vanishing derivatives of
// orders 1..k at both ends. coeffs[j] multiplies t^j (degree 2k+1).
struct SmoothstepPoly {
  int k = 0;
  std::vector<double> coeffs;

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  // j-th derivative, any j >= 0.
  double derivative(double t, int j) const;
};

inline constexpr int kMaxSmoothstepOrder = 10;

// Throws ValidationError unless 0 <= k <= kMaxSmoothstepOrder.
SmoothstepPoly smoothstep_coeffs(int k);

struct TanhKind {
  double beta = 8.0;
};
struct SmoothstepKind {
  int k = 3;
};
struct AsymmetricKind {
  int k = 2;
  double ext = 0.0;
};

struct TransitionJet {
  double value = 0.0;
  double d1 = 0.0;  // d phi / d d
  double d2 = 0.0;  // d^2 phi / d d^2
};

// Maps signed distance to pseudo-density with exact plateau clipping.
// Immutable after construction; the smoothstep polynomial is cached.
class TransitionSpec {
 public:
  using Kind = std::variant<TanhKind, SmoothstepKind, AsymmetricKind>;

  TransitionSpec();  // smoothstep k=3, delta=0.05
  TransitionSpec(Kind kind, double delta);

  static TransitionSpec tanh(double beta, double delta);
  static TransitionSpec smoothstep(int k, double delta);
  static TransitionSpec asymmetric(int k, double ext, double delta);

  const Kind& kind() const { return kind_; }
  double delta() const { return delta_; }

  // Open support (lo, hi) of the derivatives in signed-distance units:
  // value is 1 for d <= lo and 0 for d >= hi.
  double support_lo() const;
  double support_hi() const;

  TransitionJet eval(double d) const;

  std::string describe() const;

 private:
  Kind kind_;
  double delta_;
  SmoothstepPoly poly_;
};

// Value/gradient/Hessian of one pill's pseudo-density at x.
struct PillJet {
  double value = 0.0;
  Vec5 grad = Vec5::Zero();
  Mat5 hess = Mat5::Zero();
  bool singular = false;
  // True iff x lies in the open transition band (nonzero sensitivities).
  bool in_band = false;
};

// ext inflates the radius inside the distance evaluation only (r + ext).
PillJet pseudo_density_jet(const TransitionSpec& spec, const PillParams& pill,
                           Point2 x, double ext = 0.0,
                           double eps_sing = kDefaultEpsSing);

double pseudo_density(const TransitionSpec& spec, const PillParams& pill,
                      Point2 x, double ext = 0.0);

}  // namespace pillfit

#endif
