#ifndef PERFSIM_STATS_SUMMARY_HPP
#define PERFSIM_STATS_SUMMARY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/rng.hpp"
#include "perfsim/spatial/geometry.hpp"
#include "perfsim/util/parallel.hpp"

namespace perfsim::stats {

using spatial::pattern;
using spatial::planar_point;
using spatial::window;

enum class summary_kind { K, L, T_raw, T_transformed };

struct summary_function {
  std::vector<double> r;
  std::vector<double> value;
  summary_kind kind = summary_kind::K;
};

// Default grid: equally spaced on (0, shorter_side/4].
inline std::vector<double> default_r_grid(const window& w, std::size_t n = 512) {
  const double r_max = w.shorter_side() / 4.0;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = r_max * static_cast<double>(i + 1) / static_cast<double>(n);
  return grid;
}

inline void check_grid(const std::vector<double>& grid, const window& w) {
  if (grid.empty()) throw input_error("empty distance grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) throw input_error("distance grid must be strictly increasing");
  if (!(grid.front() > 0.0)) throw input_error("distance grid must be positive");
  if (!(grid.back() < w.shorter_side() / 2.0))
    throw input_error("distance grid must stay below half the shorter window side");
}

// Translation-corrected K estimator:
//   K(t) = |W| / (n (n-1)) * sum_{i != j} 1{d_ij <= t} / w_ij,
//   w_ij = (a - |dx|) (b - |dy|) / (a b).
inline summary_function estimate_K(const pattern& pat, const std::vector<double>& grid) {
  check_grid(grid, pat.win);
  const std::size_t n = pat.size();
  if (n < 2) throw input_error("K estimator needs at least 2 points");
  const double a = pat.win.width();
  const double b = pat.win.height();
  const double area = pat.win.area();
  const double t_max = grid.back();

  // (distance, weight contribution) for unordered pairs, doubled for order.
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = std::fabs(pat.points[i].x - pat.points[j].x);
      const double dy = std::fabs(pat.points[i].y - pat.points[j].y);
      const double d = std::hypot(dx, dy);
      if (d > t_max) continue;
      const double w = (a - dx) * (b - dy) / (a * b);
      pairs.emplace_back(d, 2.0 / w);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  summary_function out;
  out.kind = summary_kind::K;
  out.r = grid;
  out.value.resize(grid.size());
  const double norm = area / (static_cast<double>(n) * static_cast<double>(n - 1));
  double acc = 0.0;
  std::size_t cursor = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (cursor < pairs.size() && pairs[cursor].first <= grid[g]) acc += pairs[cursor++].second;
    out.value[g] = norm * acc;
  }
  return out;
}

inline summary_function estimate_L(const pattern& pat, const std::vector<double>& grid) {
  summary_function out = estimate_K(pat, grid);
  out.kind = summary_kind::L;
  for (auto& v : out.value) v = std::sqrt(v / M_PI);
  return out;
}

// Translation-corrected third-order statistic: triples with all pairwise
// distances below t, each weighted by the reciprocal area of
// W intersected with its two shifted copies (the translation correction for
// triples), normalized so the result estimates a quantity proportional to
// t^4 under a homogeneous Poisson process.
inline summary_function estimate_T(const pattern& pat, const std::vector<double>& grid) {
  check_grid(grid, pat.win);
  const std::size_t n = pat.size();
  if (n < 3) throw input_error("T estimator needs at least 3 points");
  const double a = pat.win.width();
  const double b = pat.win.height();
  const double t_max = grid.back();

  // (entry distance = max pairwise, weight) per unordered triple.
  std::vector<std::pair<double, double>> triples;
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = spatial::distance(pat.points[i], pat.points[j]);
      dist[i * n + j] = d;
    }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = dist[i * n + j];
      if (dij > t_max) continue;
      for (std::size_t k = j + 1; k < n; ++k) {
        const double dik = dist[i * n + k];
        if (dik > t_max) continue;
        const double djk = dist[j * n + k];
        if (djk > t_max) continue;
        const double vx = pat.points[j].x - pat.points[i].x;
        const double vy = pat.points[j].y - pat.points[i].y;
        const double wx = pat.points[k].x - pat.points[i].x;
        const double wy = pat.points[k].y - pat.points[i].y;
        const double width = a - (std::max({vx, wx, 0.0}) - std::min({vx, wx, 0.0}));
        const double height = b - (std::max({vy, wy, 0.0}) - std::min({vy, wy, 0.0}));
        if (!(width > 0.0) || !(height > 0.0))
          throw internal_error("triple translation weight: empty intersection");
        triples.emplace_back(std::max({dij, dik, djk}), 6.0 / (width * height));
      }
    }
  }
  std::sort(triples.begin(), triples.end());

  summary_function out;
  out.kind = summary_kind::T_raw;
  out.r = grid;
  out.value.resize(grid.size());
  const double nn = static_cast<double>(n);
  const double norm = pat.win.area() * pat.win.area() / (nn * (nn - 1.0) * (nn - 2.0));
  double acc = 0.0;
  std::size_t cursor = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (cursor < triples.size() && triples[cursor].first <= grid[g])
      acc += triples[cursor++].second;
    out.value[g] = norm * acc;
  }
  return out;
}

// Calibration for the fourth-root T transform.  The defining property is
// that a homogeneous Poisson pattern maps to zero in expectation, so c is
// chosen per grid point as c(r) = (r / E[T^(1/4)])^4 with the expectation
// estimated by Monte Carlo at a reference intensity.  Grid points where no
// triple ever appeared get a NaN calibration (the transform is undefined
// there; plots and tests skip them).
struct t_calibration {
  std::vector<double> r;
  std::vector<double> c;
  double intensity = 0.0;
  std::size_t n_sims = 0;
};

inline pattern sample_poisson_pattern(double intensity, const window& w, rng& r) {
  pattern out;
  out.win = w;
  const auto n = r.poisson(intensity * w.area());
  out.points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i)
    out.points.push_back({w.x0 + w.width() * r.uniform(), w.y0 + w.height() * r.uniform()});
  return out;
}

inline t_calibration calibrate_T(double intensity, const window& w,
                                 const std::vector<double>& grid, std::size_t n_sims,
                                 std::uint64_t seed, int workers = 0) {
  check_grid(grid, w);
  std::vector<std::vector<double>> roots(n_sims);
  parallel_for(n_sims, resolve_workers(workers), [&](std::size_t s) {
    rng r(seed, 0x7c00 + s);
    pattern pat = sample_poisson_pattern(intensity, w, r);
    while (pat.size() < 3) {
      pat = sample_poisson_pattern(intensity, w, r);
    }
    const auto t = estimate_T(pat, grid);
    std::vector<double> q(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) q[g] = std::pow(t.value[g], 0.25);
    roots[s] = std::move(q);
  });
  t_calibration cal;
  cal.r = grid;
  cal.c.resize(grid.size());
  cal.intensity = intensity;
  cal.n_sims = n_sims;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double mean = 0.0;
    for (const auto& q : roots) mean += q[g];
    mean /= static_cast<double>(n_sims);
    cal.c[g] = mean > 0.0 ? std::pow(grid[g] / mean, 4.0) : std::numeric_limits<double>::quiet_NaN();
  }
  return cal;
}

// (c(r) T(r))^(1/4) - r.
inline summary_function transform_T(const summary_function& t_raw, const t_calibration& cal) {
  if (t_raw.r.size() != cal.r.size()) throw input_error("calibration grid mismatch");
  summary_function out;
  out.kind = summary_kind::T_transformed;
  out.r = t_raw.r;
  out.value.resize(t_raw.r.size());
  for (std::size_t g = 0; g < out.r.size(); ++g)
    out.value[g] = std::pow(cal.c[g] * t_raw.value[g], 0.25) - out.r[g];
  return out;
}

struct envelope_curves {
  std::vector<double> r;
  std::vector<double> lo;
  std::vector<double> mean;
  std::vector<double> hi;
  std::size_t n_sims = 0;
};

// Pointwise min/mean/max of n_sims simulated summary curves; sim_fn(i) must
// return values over `grid` for the i-th independent simulation.
template <typename SimFn>
envelope_curves envelope(const std::vector<double>& grid, std::size_t n_sims, SimFn&& sim_fn,
                         int workers = 0) {
  if (n_sims < 2) throw input_error("envelope needs at least 2 simulations");
  std::vector<std::vector<double>> curves(n_sims);
  parallel_for(n_sims, resolve_workers(workers),
               [&](std::size_t i) { curves[i] = sim_fn(i); });
  envelope_curves env;
  env.r = grid;
  env.n_sims = n_sims;
  env.lo.assign(grid.size(), std::numeric_limits<double>::infinity());
  env.hi.assign(grid.size(), -std::numeric_limits<double>::infinity());
  env.mean.assign(grid.size(), 0.0);
  for (const auto& c : curves) {
    if (c.size() != grid.size()) throw internal_error("envelope: curve/grid size mismatch");
    for (std::size_t g = 0; g < grid.size(); ++g) {
      env.lo[g] = std::min(env.lo[g], c[g]);
      env.hi[g] = std::max(env.hi[g], c[g]);
      env.mean[g] += c[g];
    }
  }
  for (auto& v : env.mean) v /= static_cast<double>(n_sims);
  return env;
}

}  // namespace perfsim::stats

#endif  // PERFSIM_STATS_SUMMARY_HPP
