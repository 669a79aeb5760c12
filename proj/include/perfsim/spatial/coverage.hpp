#ifndef PERFSIM_SPATIAL_COVERAGE_HPP
#define PERFSIM_SPATIAL_COVERAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/spatial/geometry.hpp"

namespace perfsim::spatial {

// Discretization used for every coverage measure: a cell counts as covered
// by a disc iff its center lies inside the disc.  The grid extends beyond
// the window by the largest grain radius, so grains are never truncated at
// the window edge (the measure is over the full dilated set).
struct grid_spec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double h = 0.0;
  std::int64_t nx = 0;
  std::int64_t ny = 0;

  grid_spec() = default;
  grid_spec(const window& w, double cell, double padding) {
    if (!(cell > 0.0)) throw input_error("grid resolution must be positive");
    h = cell;
    origin_x = w.x0 - padding;
    origin_y = w.y0 - padding;
    nx = static_cast<std::int64_t>(std::ceil((w.width() + 2.0 * padding) / h)) + 1;
    ny = static_cast<std::int64_t>(std::ceil((w.height() + 2.0 * padding) / h)) + 1;
  }

  double center_x(std::int64_t i) const { return origin_x + (static_cast<double>(i) + 0.5) * h; }
  double center_y(std::int64_t j) const { return origin_y + (static_cast<double>(j) + 0.5) * h; }

  // Inclusive index range of cells whose center_x lies in [lo, hi]; empty
  // when first > last.  Clamped to the grid.
  void x_span(double lo, double hi, std::int64_t& first, std::int64_t& last) const {
    first = static_cast<std::int64_t>(std::ceil((lo - origin_x) / h - 0.5));
    last = static_cast<std::int64_t>(std::floor((hi - origin_x) / h - 0.5));
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last, nx - 1);
  }
  void y_span(double lo, double hi, std::int64_t& first, std::int64_t& last) const {
    first = static_cast<std::int64_t>(std::ceil((lo - origin_y) / h - 0.5));
    last = static_cast<std::int64_t>(std::floor((hi - origin_y) / h - 0.5));
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last, ny - 1);
  }
};

// A certified upper bound on the number of cell centers a disc of radius r
// can cover, wherever its center falls: every cell whose rectangle comes
// within r of a reference cell is counted.  Slightly conservative, which is
// the safe direction for dominating rates and thinning bounds.
inline std::int64_t max_cells_per_disc(double h, double r) {
  const auto range = static_cast<std::int64_t>(std::ceil(r / h)) + 1;
  std::int64_t count = 0;
  for (std::int64_t dj = -range; dj <= range; ++dj) {
    for (std::int64_t di = -range; di <= range; ++di) {
      const double px = (static_cast<double>(di) + 0.5) * h;
      const double py = (static_cast<double>(dj) + 0.5) * h;
      const double dx = std::max(0.0, std::fabs(px - 0.5 * h) - 0.5 * h);
      const double dy = std::max(0.0, std::fabs(py - 0.5 * h) - 0.5 * h);
      if (dx * dx + dy * dy <= r * r) ++count;
    }
  }
  return count;
}

// Dense occupancy grid with per-cell multiplicities: supports the full
// union-of-discs measure and incremental queries.  Suitable for windows
// where nx*ny fits comfortably in memory; the model evaluation path below
// computes the same quantities without materializing the grid.
class coverage_field {
 public:
  coverage_field(const grid_spec& g, double radius)
      : grid_(g), radius_(radius), counts_(static_cast<std::size_t>(g.nx * g.ny), 0) {}

  const grid_spec& grid() const { return grid_; }
  double radius() const { return radius_; }
  double measure() const { return static_cast<double>(covered_) * grid_.h * grid_.h; }

  void add(const planar_point& p) { update(p, +1); }
  void remove(const planar_point& p) { update(p, -1); }

  // Area that adding p would contribute: h^2 * #cells in p's disc that are
  // currently uncovered.
  double incremental(const planar_point& p) const {
    std::int64_t zero_cells = 0;
    for_disc_rows(p, [&](std::int64_t j, std::int64_t a, std::int64_t b) {
      const std::size_t base = static_cast<std::size_t>(j) * grid_.nx;
      for (std::int64_t i = a; i <= b; ++i)
        if (counts_[base + i] == 0) ++zero_cells;
    });
    return static_cast<double>(zero_cells) * grid_.h * grid_.h;
  }

 private:
  template <typename RowFn>
  void for_disc_rows(const planar_point& p, RowFn&& fn) const {
    std::int64_t j0, j1;
    grid_.y_span(p.y - radius_, p.y + radius_, j0, j1);
    for (std::int64_t j = j0; j <= j1; ++j) {
      const double dy = grid_.center_y(j) - p.y;
      const double s = radius_ * radius_ - dy * dy;
      if (s < 0.0) continue;
      const double half = std::sqrt(s);
      std::int64_t a, b;
      grid_.x_span(p.x - half, p.x + half, a, b);
      if (a <= b) fn(j, a, b);
    }
  }

  void update(const planar_point& p, int delta) {
    for_disc_rows(p, [&](std::int64_t j, std::int64_t a, std::int64_t b) {
      const std::size_t base = static_cast<std::size_t>(j) * grid_.nx;
      for (std::int64_t i = a; i <= b; ++i) {
        auto& c = counts_[base + i];
        if (delta > 0) {
          if (c++ == 0) ++covered_;
        } else {
          if (--c == 0) --covered_;
        }
      }
    });
  }

  grid_spec grid_;
  double radius_;
  std::vector<std::uint16_t> counts_;
  std::int64_t covered_ = 0;
};

// Union-of-discs measure of a whole pattern on a fresh field.
inline double coverage_measure(const std::vector<planar_point>& points, const grid_spec& g,
                               double radius) {
  coverage_field field(g, radius);
  for (const auto& p : points) field.add(p);
  return field.measure();
}

// Grid-free incremental coverage: the area a disc at u adds to the union of
// discs at `others`, computed row by row as span-minus-spans.  Produces the
// identical cell set (hence identical value) to coverage_field::incremental
// on the same grid, but costs O(rows * neighbours) instead of O(cells) and
// needs no grid storage, which matters on large windows.
inline double incremental_coverage_rowscan(const planar_point& u, double radius,
                                           const std::vector<planar_point>& others,
                                           const grid_spec& g) {
  // Points whose disc could share a cell center with u's disc.
  std::vector<const planar_point*> near;
  for (const auto& q : others)
    if (distance(u, q) <= 2.0 * radius) near.push_back(&q);

  std::int64_t j0, j1;
  g.y_span(u.y - radius, u.y + radius, j0, j1);
  std::int64_t uncovered = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> blocks;
  for (std::int64_t j = j0; j <= j1; ++j) {
    const double cy = g.center_y(j);
    const double dy = cy - u.y;
    const double s = radius * radius - dy * dy;
    if (s < 0.0) continue;
    const double half = std::sqrt(s);
    std::int64_t a, b;
    g.x_span(u.x - half, u.x + half, a, b);
    if (a > b) continue;

    blocks.clear();
    for (const planar_point* q : near) {
      const double qdy = cy - q->y;
      const double qs = radius * radius - qdy * qdy;
      if (qs < 0.0) continue;
      const double qhalf = std::sqrt(qs);
      std::int64_t qa, qb;
      g.x_span(q->x - qhalf, q->x + qhalf, qa, qb);
      qa = std::max(qa, a);
      qb = std::min(qb, b);
      if (qa <= qb) blocks.emplace_back(qa, qb);
    }
    if (blocks.empty()) {
      uncovered += b - a + 1;
      continue;
    }
    std::sort(blocks.begin(), blocks.end());
    std::int64_t cursor = a;
    for (const auto& [qa, qb] : blocks) {
      if (qa > cursor) uncovered += qa - cursor;
      cursor = std::max(cursor, qb + 1);
      if (cursor > b) break;
    }
    if (cursor <= b) uncovered += b - cursor + 1;
  }
  return static_cast<double>(uncovered) * g.h * g.h;
}

}  // namespace perfsim::spatial

#endif  // PERFSIM_SPATIAL_COVERAGE_HPP
