#ifndef PERFSIM_SPATIAL_GEOMETRY_HPP
#define PERFSIM_SPATIAL_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/trajectory.hpp"

namespace perfsim::spatial {

using perfsim::planar_point;

struct window {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  double shorter_side() const { return std::min(width(), height()); }
  bool contains(const planar_point& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  void validate() const {
    if (!(x1 > x0) || !(y1 > y0)) throw input_error("window must have positive area");
  }
};

struct pattern {
  std::vector<planar_point> points;
  window win;

  std::size_t size() const { return points.size(); }
};

inline double distance(const planar_point& a, const planar_point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace perfsim::spatial

#endif  // PERFSIM_SPATIAL_GEOMETRY_HPP
