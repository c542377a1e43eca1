// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "objective.hpp"

namespace pillfit {

double relative_error(const Eigen::MatrixXd& analytic,
                      const Eigen::MatrixXd& fd) {
  const double scale = std::max({analytic.lpNorm<Eigen::Infinity>(),
                                 fd.lpNorm<Eigen::Infinity>(),
                                 kRelErrFloor});
  return (analytic - fd).lpNorm<Eigen::Infinity>() / scale;
}

DerivativeCheck check_derivatives(const ValueFn& value, const JetFn& jet,
                                  const Eigen::VectorXd& x0, double step) {
  const auto n = x0.size();
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  jet(x0, g, h);

  // Richardson combination of central differences at h and h/2 cancels the
  // h^2 truncation term, which otherwise dominates on steep transition bands.
  Eigen::VectorXd g_fd(n);
  Eigen::MatrixXd h_fd(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double gd[2];
    Eigen::VectorXd hd[2];
    for (int level = 0; level < 2; ++level) {
      const double hs = level == 0 ? step : 0.5 * step;
      Eigen::VectorXd xp = x0, xm = x0;
      xp[i] += hs;
      xm[i] -= hs;
      gd[level] = (value(xp) - value(xm)) / (2.0 * hs);
      Eigen::VectorXd gp, gm;
      Eigen::MatrixXd unused;
      jet(xp, gp, unused);
      jet(xm, gm, unused);
      hd[level] = (gp - gm) / (2.0 * hs);
    }
    g_fd[i] = (4.0 * gd[1] - gd[0]) / 3.0;
    h_fd.col(i) = (4.0 * hd[1] - hd[0]) / 3.0;
  }

  DerivativeCheck out;
  out.inactive = g.isZero(0.0);
  out.grad_rel_err = relative_error(g, g_fd);
  out.hess_rel_err = relative_error(h, h_fd);
  return out;
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

PillParams random_pill(Rng& rng, double lo, double hi, double min_len,
                       double max_len, double r_lo, double r_hi) {
  const double cx = uniform(rng, lo, hi);
  const double cy = uniform(rng, lo, hi);
  const double len = uniform(rng, min_len, max_len);
  const double th = uniform(rng, 0.0, std::numbers::pi);
  const double dx = 0.5 * len * std::cos(th);
  const double dy = 0.5 * len * std::sin(th);
  return PillParams(cx - dx, cy - dy, cx + dx, cy + dy,
                    uniform(rng, r_lo, r_hi));
}

// Keeps samples away from the singular set and from the transition rays,
// where the distance is only C1 in the far endpoint.
bool well_separated(Point2 x, const PillParams& pill) {
  const double ex = pill.qx() - pill.px();
  const double ey = pill.qy() - pill.py();
  const double len2 = ex * ex + ey * ey;
  const double t = ((x.x - pill.px()) * ex + (x.y - pill.py()) * ey) / len2;
  if (std::abs(t) < 1e-3 || std::abs(t - 1.0) < 1e-3) return false;
  return unsigned_distance(x, pill) > 1e-2;
}

// Signed distances where the transition is not C2: the plateau edges, and
// the boundary of the asymmetric variant where the two half-widths meet.
bool near_kink(double d, const TransitionSpec& tspec) {
  constexpr double margin = 1e-4;
  if (std::abs(d - tspec.support_lo()) < margin) return true;
  if (std::abs(d - tspec.support_hi()) < margin) return true;
  return std::holds_alternative<AsymmetricKind>(tspec.kind()) &&
         std::abs(d) < margin;
}

// True when no quadrature node inside some pill's transition band sits near
// that pill's non-smooth set. Cosine shaping is only C1 where the density sum
// crosses 1 and N, so those nodes are avoided as well.
bool smooth_at_nodes(const std::vector<PillParams>& pills,
                     const GridSpec& grid, const TransitionSpec& tspec,
                     const AggregatorSpec& aspec) {
  const double lo = tspec.support_lo() - 1e-2;
  const double hi = tspec.support_hi() + 1e-2;
  const auto* cosine = std::get_if<CosineKind>(&aspec.kind());
  for (int e = 0; e < grid.nx * grid.ny; ++e) {
    for (const Point2& x : quad_points(grid, e, grid.quad_order)) {
      double sum = 0.0;
      for (const PillParams& p : pills) {
        sum += pseudo_density(tspec, p, x);
        const double d = signed_distance(x, p);
        if (d <= lo || d >= hi) continue;
        if (!well_separated(x, p) || near_kink(d, tspec)) return false;
      }
      if (cosine && (std::abs(sum - 1.0) < 1e-3 ||
                     std::abs(sum - cosine->n) < 1e-3)) {
        return false;
      }
    }
  }
  return true;
}

void update(GradcheckEntry& e, const DerivativeCheck& c) {
  ++e.samples;
  if (c.inactive) ++e.inactive;
  e.max_grad_rel_err = std::max(e.max_grad_rel_err, c.grad_rel_err);
  e.max_hess_rel_err = std::max(e.max_hess_rel_err, c.hess_rel_err);
}

DesignVector design_from(const Eigen::VectorXd& z) {
  std::vector<PillParams> pills;
  for (Eigen::Index m = 0; m < z.size() / 5; ++m) {
    pills.push_back(PillParams::unchecked(z.segment<5>(5 * m)));
  }
  return DesignVector(std::move(pills));
}

constexpr double kStep = 1e-5;

}  // namespace

std::vector<GradcheckEntry> gradcheck_suite(const TransitionSpec& tspec,
                                            const AggregatorSpec& aspec,
                                            int samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradcheckEntry> out;

  {
    GradcheckEntry e;
    e.name = "geometry.distance_jet";
    while (e.samples < samples) {
      const PillParams pill = random_pill(rng, 0.2, 0.8, 0.1, 0.6, 0.05, 0.3);
      const Point2 x{uniform(rng, -0.5, 1.5), uniform(rng, -0.5, 1.5)};
      if (!well_separated(x, pill)) continue;
      auto value = [&](const Eigen::VectorXd& z) {
        return unsigned_distance(x, PillParams::unchecked(z));
      };
      auto jet = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g,
                     Eigen::MatrixXd& h) {
        const DistanceJet dj = distance_jet(x, PillParams::unchecked(z), false);
        g = dj.grad;
        h = dj.hess;
      };
      update(e, check_derivatives(value, jet, pill.to_vector(), kStep));
    }
    out.push_back(e);
  }

  {
    GradcheckEntry e;
    e.name = "transition.pseudo_density_jet";
    const double lo = tspec.support_lo();
    const double hi = tspec.support_hi();
    while (e.samples < samples) {
      const PillParams pill = random_pill(rng, 0.2, 0.8, 0.1, 0.6, 0.08, 0.3);
      const Point2 x{uniform(rng, -0.2, 1.2), uniform(rng, -0.2, 1.2)};
      const double d = signed_distance(x, pill);
      // Inside the band, away from its edges, where FD straddles the clip.
      const double margin = 0.05 * (hi - lo);
      if (!(d > lo + margin && d < hi - margin)) continue;
      if (!well_separated(x, pill) || near_kink(d, tspec)) continue;
      auto value = [&](const Eigen::VectorXd& z) {
        return pseudo_density(tspec, PillParams::unchecked(z), x);
      };
      auto jet = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g,
                     Eigen::MatrixXd& h) {
        const PillJet pj = pseudo_density_jet(tspec, PillParams::unchecked(z), x);
        g = pj.grad;
        h = pj.hess;
      };
      update(e, check_derivatives(value, jet, pill.to_vector(), kStep));
    }
    out.push_back(e);
  }

  const int assembled = samples;

  {
    GradcheckEntry e;
    e.name = "grid.element_average_jet";
    GridSpec grid;
    grid.nx = grid.ny = 8;
    grid.quad_order = 3;
    while (e.samples < assembled) {
      const int ei = std::uniform_int_distribution<int>(2, 5)(rng);
      const int ej = std::uniform_int_distribution<int>(2, 5)(rng);
      const double cx = (ei + 0.5) / grid.nx;
      const double cy = (ej + 0.5) / grid.ny;
      std::vector<PillParams> pills;
      for (int m = 0; m < 2; ++m) {
        pills.push_back(random_pill(rng, 0.0, 0.0, 0.1, 0.4, 0.05, 0.15));
        const Point2 c = pills.back().center();
        const double ox = cx - c.x + uniform(rng, -0.12, 0.12);
        const double oy = cy - c.y + uniform(rng, -0.12, 0.12);
        const PillParams& p = pills.back();
        pills.back() = PillParams(p.px() + ox, p.py() + oy, p.qx() + ox,
                                  p.qy() + oy, p.r());
      }
      if (!smooth_at_nodes(pills, grid, tspec, aspec)) continue;
      const DesignVector base(pills);
      auto value = [&](const Eigen::VectorXd& z) {
        const DesignVector dv = design_from(z);
        return DensityModel(dv, tspec, aspec, grid).element_value(ei, ej);
      };
      auto jet = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g,
                     Eigen::MatrixXd& h) {
        const DesignVector dv = design_from(z);
        const ElementJet j = DensityModel(dv, tspec, aspec, grid).element(ei, ej, 2);
        g = j.dense_grad(dv.size());
        h = j.dense_hess(dv.size());
      };
      update(e, check_derivatives(value, jet, base.to_vector(), kStep));
    }
    out.push_back(e);
  }

  for (ObjectiveKind kind : {ObjectiveKind::Tracking, ObjectiveKind::Reward}) {
    GradcheckEntry e;
    e.name = std::string("objective.") + objective_name(kind) + "_jet";
    GridSpec grid;
    grid.nx = grid.ny = 10;
    grid.quad_order = 3;
    while (e.samples < assembled) {
      ElementField target(grid.nx, grid.ny);
      for (double& v : target.values) v = uniform(rng, 0.0, 1.0);
      std::vector<PillParams> pills;
      for (int m = 0; m < 3; ++m) {
        pills.push_back(random_pill(rng, 0.25, 0.75, 0.1, 0.4, 0.05, 0.15));
      }
      if (!smooth_at_nodes(pills, grid, tspec, aspec)) continue;
      ObjectiveContext ctx;
      ctx.kind = kind;
      ctx.tspec = &tspec;
      ctx.aspec = &aspec;
      ctx.grid = &grid;
      ctx.target = &target;
      auto value = [&](const Eigen::VectorXd& z) {
        return objective_value(ctx, design_from(z));
      };
      auto jet = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g,
                     Eigen::MatrixXd& h) {
        ObjectiveJet oj = objective_jet(ctx, design_from(z), 2);
        g = oj.grad;
        h = oj.hess;
      };
      update(e, check_derivatives(value, jet,
                                  DesignVector(pills).to_vector(), kStep));
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace pillfit
