// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_GRID_HPP
#define PILLFIT_CORE_GRID_HPP

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "aggregation.hpp"
#include "geometry.hpp"
#include "transition.hpp"

namespace pillfit {

inline constexpr int kMaxQuadOrder = 8;

// Uniform Cartesian mesh over [x0, x0+lx] x [y0, y0+ly]. With pad > 0 the
// evaluation window grows by whole elements on every side (at least pad
// wide) while design bounds stay on the unpadded rectangle.
struct GridSpec {
  int nx = 100;
  int ny = 100;
  double x0 = 0.0;
  double y0 = 0.0;
  double lx = 1.0;
  double ly = 1.0;
  double pad = 0.0;
  int quad_order = 3;

  void validate() const;

  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  double cell_area() const { return hx() * hy(); }
  int element_count() const { return nx * ny; }

  int pad_x() const;
  int pad_y() const;
  int eval_nx() const { return nx + 2 * pad_x(); }
  int eval_ny() const { return ny + 2 * pad_y(); }
  int eval_element_count() const { return eval_nx() * eval_ny(); }

  bool operator==(const GridSpec&) const = default;
};

// Quadrature nodes of unpadded element e (row-major, row 0 at the bottom).
// q = 1 is the midpoint; q >= 2 places nodes at fractions i/(q-1), corners
// included. Weights are all 1/q^2.
std::vector<Point2> quad_points(const GridSpec& grid, int e, int q);

// Same for an element of the (possibly padded) evaluation window; i, j may
// be negative or exceed nx/ny by up to the pad width.
std::vector<Point2> quad_points_ij(const GridSpec& grid, int i, int j, int q);

// Per-element scalar field over the unpadded grid, row 0 = bottom.
struct ElementField {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  ElementField() = default;
  ElementField(int nx_, int ny_, double fill = 0.0)
      : nx(nx_), ny(ny_), values(static_cast<size_t>(nx_) * ny_, fill) {}

  double& at(int i, int j) { return values[static_cast<size_t>(j) * nx + i]; }
  double at(int i, int j) const {
    return values[static_cast<size_t>(j) * nx + i];
  }
  bool same_shape(const ElementField& o) const {
    return nx == o.nx && ny == o.ny;
  }
};

// n pills in fixed block order (px, py, qx, qy, r), plus per-pill flags that
// remove the radius from the free variables.
struct DesignVector {
  std::vector<PillParams> pills;
  std::vector<bool> radius_frozen;

  DesignVector() = default;
  explicit DesignVector(std::vector<PillParams> p)
      : pills(std::move(p)), radius_frozen(pills.size(), false) {}

  int size() const { return static_cast<int>(pills.size()); }
  bool empty() const { return pills.empty(); }
  Eigen::VectorXd to_vector() const;
  // Keeps the frozen flags of *this; validates every pill.
  DesignVector with_values(const Eigen::VectorXd& z) const;
  void push_back(const PillParams& p, bool frozen = false) {
    pills.push_back(p);
    radius_frozen.push_back(frozen);
  }
};

// Element average of the aggregate with derivatives w.r.t. the pills listed
// in `pills`. grad/hess are laid out in local blocks of five following that
// list; blocks of pills absent from the list are zero. Off-diagonal blocks
// are only filled when the aggregator couples features.
struct ElementJet {
  double value = 0.0;
  std::vector<int> pills;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  bool singular = false;  // a node had to be nudged off the singular set

  // Expand to the full 5n gradient / Hessian.
  Eigen::VectorXd dense_grad(int n) const;
  Eigen::MatrixXd dense_hess(int n) const;
};

// Evaluates element averages for one design snapshot. Holds references; the
// inputs must outlive it. Pills are indexed by their bounding boxes, so the
// per-element cost scales with the number of nearby pills only.
class DensityModel {
 public:
  DensityModel(const DesignVector& design, const TransitionSpec& tspec,
               const AggregatorSpec& aspec, const GridSpec& grid,
               double ext = 0.0, double eps_sing = kDefaultEpsSing);

  // order 0: value only; 1: + gradient; 2: + Hessian. (i, j) are evaluation
  // window coordinates: 0 <= i < nx is the unpadded domain.
  ElementJet element(int i, int j, int order) const;
  double element_value(int i, int j) const;

  // Value of an element no pill reaches.
  double background() const { return background_; }

  const GridSpec& grid() const { return grid_; }
  const DesignVector& design() const { return design_; }
  double ext() const { return ext_; }

 private:
  struct Box {
    double xmin, xmax, ymin, ymax;
  };
  std::vector<int> candidates(int i, int j) const;

  const DesignVector& design_;
  const TransitionSpec& tspec_;
  const AggregatorSpec& aspec_;
  const GridSpec& grid_;
  double ext_;
  double eps_sing_;
  double background_;
  std::vector<Box> boxes_;
};

ElementJet element_average_jet(const DesignVector& design,
                               const TransitionSpec& tspec,
                               const AggregatorSpec& aspec,
                               const GridSpec& grid, int e, double ext = 0.0);

ElementField project_field(const DesignVector& design,
                           const TransitionSpec& tspec,
                           const AggregatorSpec& aspec, const GridSpec& grid,
                           double ext = 0.0, int threads = 1);

// Runs fn(begin, end, chunk) over `threads` contiguous chunks of [0, count).
// Chunk boundaries depend only on (count, threads), so callers reducing in
// chunk order get bit-identical results at a fixed thread count.
void parallel_chunks(int count, int threads,
                     const std::function<void(int, int, int)>& fn);

}  // namespace pillfit

#endif
