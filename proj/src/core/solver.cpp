// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Cholesky>

#include "error.hpp"

namespace pillfit {

void SolveOptions::validate() const {
  if (!(tol > 0.0)) throw ValidationError("solver tol must be > 0");
  if (max_iter < 1) throw ValidationError("solver max_iter must be >= 1");
  if (history < 1) throw ValidationError("lbfgs history must be >= 1");
  if (!(barrier_mu0 > 0.0)) throw ValidationError("barrier_mu0 must be > 0");
  if (ls_max_backtracks < 1) {
    throw ValidationError("ls_max_backtracks must be >= 1");
  }
  if (max_step < 0.0) throw ValidationError("max_step must be >= 0");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::Tolerance:
      return "tolerance";
    case Termination::MaxIter:
      return "max_iter";
    case Termination::LineSearchFailure:
      return "line_search_failure";
  }
  return "unknown";
}

namespace {

constexpr double kArmijoC1 = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr double kMuShrink = 0.2;
constexpr double kInf = std::numeric_limits<double>::infinity();

// -sum log(-g); +inf outside the strict interior.
double barrier_value(const std::vector<ConstraintJet>& cs) {
  double b = 0.0;
  for (const auto& c : cs) {
    if (!(c.value < 0.0)) return kInf;
    b -= std::log(-c.value);
  }
  return b;
}

void add_barrier_derivs(const std::vector<ConstraintJet>& cs, double mu,
                        Eigen::VectorXd& g, Eigen::MatrixXd* h) {
  for (const auto& c : cs) {
    const double inv = 1.0 / (-c.value);
    const auto k = c.idx.size();
    for (size_t a = 0; a < k; ++a) {
      g[c.idx[a]] += mu * inv * c.grad[a];
      if (!h) continue;
      for (size_t b = 0; b < k; ++b) {
        (*h)(c.idx[a], c.idx[b]) +=
            mu * (inv * inv * c.grad[a] * c.grad[b] + inv * c.hess(a, b));
      }
    }
  }
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

SolveResult minimize(const SmoothProblem& problem, const Eigen::VectorXd& x0,
                     const SolveOptions& opts) {
  opts.validate();
  const int dim = problem.dim;
  if (x0.size() != dim || problem.lower.size() != dim ||
      problem.upper.size() != dim) {
    throw ValidationError("solver dimension mismatch");
  }
  std::vector<bool> fixed = problem.fixed;
  fixed.resize(dim, false);
  const bool exact = opts.hessian_mode == HessianMode::Exact;

  auto project = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& keep) {
    Eigen::VectorXd out(dim);
    for (int i = 0; i < dim; ++i) {
      out[i] = fixed[i] ? keep[i]
                        : std::clamp(z[i], problem.lower[i], problem.upper[i]);
    }
    return out;
  };
  auto constraints = [&](const Eigen::VectorXd& z) {
    return problem.constraints ? problem.constraints(z)
                               : std::vector<ConstraintJet>{};
  };

  SolveResult res;
  Eigen::VectorXd x = project(x0, x0);
  std::vector<ConstraintJet> cs = constraints(x);
  if (!std::isfinite(barrier_value(cs))) {
    throw ValidationError("initial point violates an inequality constraint");
  }
  const int m = static_cast<int>(cs.size());

  Eigen::VectorXd g(dim);
  Eigen::MatrixXd h;
  ++res.eval_count;
  double f = problem.evaluate(x, &g, exact ? &h : nullptr);
  if (!std::isfinite(f) || !g.allFinite() || (exact && !all_finite(h))) {
    throw SolverError("non-finite objective or derivative at the start point");
  }
  res.objective_trace.push_back(f);
  res.trace_evals.push_back(res.eval_count);

  double mu = m > 0 ? opts.barrier_mu0 * std::max(1.0, std::abs(f)) : 0.0;
  auto barrier_done = [&] {
    return m == 0 || m * mu < opts.tol * std::max(1.0, std::abs(f));
  };

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  Eigen::VectorXd s_pending, gphi_prev;
  bool have_pending = false;

  auto shrink_mu = [&] {
    mu *= kMuShrink;
    memory.clear();
    have_pending = false;
  };

  res.termination = Termination::MaxIter;
  while (true) {
    // Merit function phi = f + mu * barrier at the current point.
    Eigen::VectorXd gphi = g;
    Eigen::MatrixXd hphi;
    if (exact) hphi = h;
    add_barrier_derivs(cs, mu, gphi, exact ? &hphi : nullptr);
    const double phi = f + (m > 0 ? mu * barrier_value(cs) : 0.0);

    if (have_pending) {
      const Eigen::VectorXd y = gphi - gphi_prev;
      const double sy = s_pending.dot(y);
      if (sy > 1e-10 * s_pending.norm() * y.norm()) {
        memory.emplace_back(s_pending, y);
        if (static_cast<int>(memory.size()) > opts.history) memory.pop_front();
      }
      have_pending = false;
    }

    double pg_norm = 0.0;
    for (int i = 0; i < dim; ++i) {
      if (fixed[i]) continue;
      const double step =
          x[i] - std::clamp(x[i] - gphi[i], problem.lower[i], problem.upper[i]);
      pg_norm = std::max(pg_norm, std::abs(step));
    }
    if (pg_norm < opts.tol) {
      if (barrier_done()) {
        res.termination = Termination::Tolerance;
        break;
      }
      shrink_mu();
      continue;
    }
    if (res.iterations >= opts.max_iter) {
      res.termination = Termination::MaxIter;
      break;
    }

    // Variables pinned at a bound with the gradient pushing outward leave
    // the free set (Bertsekas' epsilon-active set).
    const double eps = std::min(1e-3, pg_norm);
    std::vector<int> free_idx;
    for (int i = 0; i < dim; ++i) {
      if (fixed[i]) continue;
      const bool at_lo = x[i] - problem.lower[i] <= eps && gphi[i] > 0.0;
      const bool at_hi = problem.upper[i] - x[i] <= eps && gphi[i] < 0.0;
      if (!at_lo && !at_hi) free_idx.push_back(i);
    }
    const int nf = static_cast<int>(free_idx.size());

    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd gf(nf);
    for (int a = 0; a < nf; ++a) gf[a] = gphi[free_idx[a]];

    if (nf > 0 && exact) {
      Eigen::MatrixXd hf(nf, nf);
      for (int a = 0; a < nf; ++a) {
        for (int b = 0; b < nf; ++b) hf(a, b) = hphi(free_idx[a], free_idx[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(hf);
      double lambda = 1e-8;
      while (llt.info() != Eigen::Success) {
        Eigen::MatrixXd shifted = hf;
        shifted.diagonal().array() += lambda;
        llt.compute(shifted);
        lambda *= 2.0;
        if (!std::isfinite(lambda)) {
          throw SolverError("Hessian repair failed");
        }
      }
      const Eigen::VectorXd df = -llt.solve(gf);
      for (int a = 0; a < nf; ++a) d[free_idx[a]] = df[a];
    } else if (nf > 0) {
      // Two-loop recursion restricted to the free coordinates.
      auto restrict = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out(nf);
        for (int a = 0; a < nf; ++a) out[a] = v[free_idx[a]];
        return out;
      };
      Eigen::VectorXd q = gf;
      const int k = static_cast<int>(memory.size());
      std::vector<double> alpha(k), rho(k);
      std::vector<Eigen::VectorXd> ss(k), yy(k);
      for (int t = 0; t < k; ++t) {
        ss[t] = restrict(memory[t].first);
        yy[t] = restrict(memory[t].second);
        const double sy = ss[t].dot(yy[t]);
        rho[t] = sy > 0.0 ? 1.0 / sy : 0.0;
      }
      for (int t = k - 1; t >= 0; --t) {
        alpha[t] = rho[t] * ss[t].dot(q);
        q -= alpha[t] * yy[t];
      }
      double gamma = 0.0;
      if (k > 0 && yy[k - 1].squaredNorm() > 0.0 && rho[k - 1] > 0.0) {
        gamma = 1.0 / (rho[k - 1] * yy[k - 1].squaredNorm());
      } else {
        gamma = 1.0 / std::max(gf.norm(), 1e-300);
      }
      Eigen::VectorXd r = gamma * q;
      for (int t = 0; t < k; ++t) {
        const double beta = rho[t] * yy[t].dot(r);
        r += ss[t] * (alpha[t] - beta);
      }
      for (int a = 0; a < nf; ++a) d[free_idx[a]] = -r[a];
    }
    if (!(gphi.dot(d) < 0.0)) {
      // Not a descent direction (e.g. stale curvature pairs): steepest descent.
      d.setZero();
      for (int i : free_idx) d[i] = -gphi[i];
      memory.clear();
    }

    // A direction that only serves the barrier cannot pass the monotone-f
    // test; recenter with a smaller mu instead of backtracking.
    if (m > 0 && !barrier_done() && !(g.dot(d) < 0.0)) {
      shrink_mu();
      continue;
    }

    double alpha = 1.0;
    if (opts.max_step > 0.0) {
      const double dn = d.lpNorm<Eigen::Infinity>();
      if (dn > opts.max_step) alpha = opts.max_step / dn;
    }
    const double alpha0 = alpha;

    bool accepted = false;
    Eigen::VectorXd xt;
    double ft = 0.0;
    std::vector<ConstraintJet> cst;
    for (int bt = 0; bt < opts.ls_max_backtracks; ++bt, alpha *= kBacktrack) {
      xt = project(x + alpha * d, x);
      if (problem.admissible && !problem.admissible(xt)) continue;
      cst = constraints(xt);
      const double bt_val = m > 0 ? barrier_value(cst) : 0.0;
      if (!std::isfinite(bt_val)) continue;
      ++res.eval_count;
      try {
        ft = problem.evaluate(xt, nullptr, nullptr);
      } catch (const Error&) {
        continue;
      }
      if (!std::isfinite(ft)) continue;
      const double phit = ft + mu * bt_val;
      if (phit <= phi + kArmijoC1 * gphi.dot(xt - x) && ft <= f) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      if (!barrier_done()) {
        shrink_mu();
        continue;
      }
      res.termination = Termination::LineSearchFailure;
      break;
    }

    const double f_old = f;
    s_pending = xt - x;
    gphi_prev = gphi;
    x = xt;
    cs = std::move(cst);
    f = problem.evaluate(x, &g, exact ? &h : nullptr);
    if (!std::isfinite(f) || !g.allFinite() || (exact && !all_finite(h))) {
      throw SolverError("non-finite objective or derivative at an accepted "
                        "iterate (iteration " +
                        std::to_string(res.iterations + 1) + ")");
    }
    have_pending = !exact;
    ++res.iterations;
    res.objective_trace.push_back(f);
    res.trace_evals.push_back(res.eval_count);

    // A small decrease only signals convergence when the line search took
    // the full step or the step itself is negligible; otherwise it just
    // reflects heavy backtracking.
    const bool full_step = alpha == alpha0 ||
                           s_pending.lpNorm<Eigen::Infinity>() < opts.tol;
    if (full_step && f_old - f < opts.tol * std::max(1.0, std::abs(f))) {
      if (barrier_done()) {
        res.termination = Termination::Tolerance;
        break;
      }
      shrink_mu();
    }
  }

  res.x = x;
  res.feasible = true;
  for (int i = 0; i < dim; ++i) {
    if (!fixed[i] && (x[i] < problem.lower[i] || x[i] > problem.upper[i])) {
      res.feasible = false;
    }
  }
  for (const auto& c : constraints(x)) {
    if (c.value > 1e-8) res.feasible = false;
  }
  return res;
}

}  // namespace pillfit
