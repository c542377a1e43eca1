// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "error.hpp"

namespace pillfit {

void GridSpec::validate() const {
  if (nx < 1 || ny < 1) throw ValidationError("grid needs nx, ny >= 1");
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw ValidationError("grid extents must be positive and finite");
  }
  if (!std::isfinite(x0) || !std::isfinite(y0)) {
    throw ValidationError("grid origin must be finite");
  }
  if (!(pad >= 0.0) || !std::isfinite(pad)) {
    throw ValidationError("grid pad must be >= 0");
  }
  if (quad_order < 1 || quad_order > kMaxQuadOrder) {
    throw ValidationError("quadrature order must be in [1, 8]");
  }
}

int GridSpec::pad_x() const {
  if (pad <= 0.0) return 0;
  return static_cast<int>(std::ceil(pad / hx() - 1e-9));
}

int GridSpec::pad_y() const {
  if (pad <= 0.0) return 0;
  return static_cast<int>(std::ceil(pad / hy() - 1e-9));
}

std::vector<Point2> quad_points_ij(const GridSpec& grid, int i, int j, int q) {
  if (q < 1 || q > kMaxQuadOrder) {
    throw std::out_of_range("quadrature order must be in [1, 8]");
  }
  const double hx = grid.hx();
  const double hy = grid.hy();
  const double ex = grid.x0 + i * hx;
  const double ey = grid.y0 + j * hy;
  std::vector<Point2> pts;
  pts.reserve(static_cast<size_t>(q) * q);
  if (q == 1) {
    pts.push_back({ex + 0.5 * hx, ey + 0.5 * hy});
    return pts;
  }
  for (int b = 0; b < q; ++b) {
    const double fy = static_cast<double>(b) / (q - 1);
    for (int a = 0; a < q; ++a) {
      const double fx = static_cast<double>(a) / (q - 1);
      pts.push_back({ex + fx * hx, ey + fy * hy});
    }
  }
  return pts;
}

std::vector<Point2> quad_points(const GridSpec& grid, int e, int q) {
  if (e < 0 || e >= grid.element_count()) {
    throw std::out_of_range("element index out of range");
  }
  return quad_points_ij(grid, e % grid.nx, e / grid.nx, q);
}

Eigen::VectorXd DesignVector::to_vector() const {
  Eigen::VectorXd z(5 * pills.size());
  for (size_t m = 0; m < pills.size(); ++m) {
    z.segment<5>(5 * static_cast<Eigen::Index>(m)) = pills[m].to_vector();
  }
  return z;
}

DesignVector DesignVector::with_values(const Eigen::VectorXd& z) const {
  if (z.size() != 5 * static_cast<Eigen::Index>(pills.size())) {
    throw ValidationError("design vector length mismatch");
  }
  DesignVector out = *this;
  for (size_t m = 0; m < pills.size(); ++m) {
    out.pills[m] = PillParams::from_vector(
        z.segment<5>(5 * static_cast<Eigen::Index>(m)));
  }
  return out;
}

Eigen::VectorXd ElementJet::dense_grad(int n) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(5 * n);
  for (size_t a = 0; a < pills.size(); ++a) {
    g.segment<5>(5 * pills[a]) += grad.segment<5>(5 * a);
  }
  return g;
}

Eigen::MatrixXd ElementJet::dense_hess(int n) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(5 * n, 5 * n);
  if (hess.size() == 0) return h;
  for (size_t a = 0; a < pills.size(); ++a) {
    for (size_t b = 0; b < pills.size(); ++b) {
      h.block<5, 5>(5 * pills[a], 5 * pills[b]) +=
          hess.block<5, 5>(5 * a, 5 * b);
    }
  }
  return h;
}

DensityModel::DensityModel(const DesignVector& design,
                           const TransitionSpec& tspec,
                           const AggregatorSpec& aspec, const GridSpec& grid,
                           double ext, double eps_sing)
    : design_(design),
      tspec_(tspec),
      aspec_(aspec),
      grid_(grid),
      ext_(ext),
      eps_sing_(eps_sing),
      background_(design.empty() ? 0.0
                                 : aggregate_of_zeros(aspec, design.size())) {
  boxes_.reserve(design.pills.size());
  for (const auto& p : design.pills) {
    const double reach = p.r() + ext + tspec.support_hi();
    boxes_.push_back({std::min(p.px(), p.qx()) - reach,
                      std::max(p.px(), p.qx()) + reach,
                      std::min(p.py(), p.qy()) - reach,
                      std::max(p.py(), p.qy()) + reach});
  }
}

std::vector<int> DensityModel::candidates(int i, int j) const {
  const double hx = grid_.hx();
  const double hy = grid_.hy();
  // Slight slack so nodes on the element border (and nudged nodes) are kept.
  const double sx = 1e-6 * hx;
  const double sy = 1e-6 * hy;
  const double xmin = grid_.x0 + i * hx - sx;
  const double xmax = grid_.x0 + (i + 1) * hx + sx;
  const double ymin = grid_.y0 + j * hy - sy;
  const double ymax = grid_.y0 + (j + 1) * hy + sy;
  std::vector<int> out;
  for (size_t m = 0; m < boxes_.size(); ++m) {
    const Box& b = boxes_[m];
    if (b.xmax < xmin || b.xmin > xmax || b.ymax < ymin || b.ymin > ymax) {
      continue;
    }
    out.push_back(static_cast<int>(m));
  }
  return out;
}

double DensityModel::element_value(int i, int j) const {
  return element(i, j, 0).value;
}

ElementJet DensityModel::element(int i, int j, int order) const {
  ElementJet out;
  const std::vector<int> cand = candidates(i, j);
  if (cand.empty()) {
    out.value = background_;
    out.grad.resize(0);
    return out;
  }

  const int k = static_cast<int>(cand.size());
  const int n_total = design_.size();
  const int q = grid_.quad_order;
  const bool want_hess = order >= 2;
  const bool coupled = aspec_.couples_features();

  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  if (order >= 1) grad = Eigen::VectorXd::Zero(5 * k);
  if (want_hess) hess = Eigen::MatrixXd::Zero(5 * k, 5 * k);
  std::vector<char> touched(k, 0);

  std::vector<PillJet> jets(k);
  std::vector<double> rho;
  std::vector<int> listed;  // local slots passed to the aggregator
  rho.reserve(k);
  listed.reserve(k);

  double sum = 0.0;
  for (Point2 x : quad_points_ij(grid_, i, j, q)) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      bool singular = false;
      for (int a = 0; a < k; ++a) {
        const PillParams& pill = design_.pills[cand[a]];
        if (order == 0) {
          jets[a].value = pseudo_density(tspec_, pill, x, ext_);
          jets[a].in_band = false;
        } else {
          jets[a] = pseudo_density_jet(tspec_, pill, x, ext_, eps_sing_);
          singular = singular || (jets[a].singular && jets[a].in_band);
        }
      }
      if (!singular) break;
      out.singular = true;
      x.y += 1e-9 * grid_.hy();
    }

    rho.clear();
    listed.clear();
    for (int a = 0; a < k; ++a) {
      if (jets[a].value > 0.0 || jets[a].in_band) {
        rho.push_back(jets[a].value);
        listed.push_back(a);
      }
    }
    const int n_zero = n_total - static_cast<int>(listed.size());
    if (listed.empty()) {
      sum += background_;
      continue;
    }
    const AggPartials ap = aggregate_sparse(aspec_, rho, n_zero, want_hess);
    sum += ap.value;
    if (order == 0) continue;

    const int nl = static_cast<int>(listed.size());
    for (int u = 0; u < nl; ++u) {
      const int a = listed[u];
      if (!jets[a].in_band) continue;
      touched[a] = 1;
      grad.segment<5>(5 * a) += ap.d1[u] * jets[a].grad;
      if (!want_hess) continue;
      hess.block<5, 5>(5 * a, 5 * a) +=
          ap.d1[u] * jets[a].hess +
          ap.d2(u, u) * jets[a].grad * jets[a].grad.transpose();
      if (!coupled) continue;
      for (int v = u + 1; v < nl; ++v) {
        const int b = listed[v];
        if (!jets[b].in_band) continue;
        const Mat5 blk = ap.d2(u, v) * jets[a].grad * jets[b].grad.transpose();
        hess.block<5, 5>(5 * a, 5 * b) += blk;
        hess.block<5, 5>(5 * b, 5 * a) += blk.transpose();
      }
    }
  }

  const double inv = 1.0 / (static_cast<double>(q) * q);
  out.value = sum * inv;
  if (order == 0) return out;

  std::vector<int> keep;
  for (int a = 0; a < k; ++a) {
    if (touched[a]) keep.push_back(a);
  }
  const int kk = static_cast<int>(keep.size());
  out.pills.resize(kk);
  out.grad.resize(5 * kk);
  if (want_hess) out.hess.resize(5 * kk, 5 * kk);
  for (int u = 0; u < kk; ++u) {
    out.pills[u] = cand[keep[u]];
    out.grad.segment<5>(5 * u) = inv * grad.segment<5>(5 * keep[u]);
    if (!want_hess) continue;
    for (int v = 0; v < kk; ++v) {
      out.hess.block<5, 5>(5 * u, 5 * v) =
          inv * hess.block<5, 5>(5 * keep[u], 5 * keep[v]);
    }
  }
  return out;
}

ElementJet element_average_jet(const DesignVector& design,
                               const TransitionSpec& tspec,
                               const AggregatorSpec& aspec,
                               const GridSpec& grid, int e, double ext) {
  if (e < 0 || e >= grid.element_count()) {
    throw std::out_of_range("element index out of range");
  }
  DensityModel model(design, tspec, aspec, grid, ext);
  return model.element(e % grid.nx, e / grid.nx, 2);
}

ElementField project_field(const DesignVector& design,
                           const TransitionSpec& tspec,
                           const AggregatorSpec& aspec, const GridSpec& grid,
                           double ext, int threads) {
  ElementField field(grid.nx, grid.ny);
  if (design.empty()) return field;
  DensityModel model(design, tspec, aspec, grid, ext);
  parallel_chunks(grid.element_count(), threads, [&](int b, int e, int) {
    for (int idx = b; idx < e; ++idx) {
      field.values[idx] = model.element_value(idx % grid.nx, idx / grid.nx);
    }
  });
  return field;
}

void parallel_chunks(int count, int threads,
                     const std::function<void(int, int, int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads <= 1) {
    if (count > 0) fn(0, count, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    const int b = static_cast<int>(static_cast<long long>(count) * t / threads);
    const int e =
        static_cast<int>(static_cast<long long>(count) * (t + 1) / threads);
    pool.emplace_back([&, b, e, t] {
      try {
        fn(b, e, t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace pillfit
