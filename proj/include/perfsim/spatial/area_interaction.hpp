#ifndef PERFSIM_SPATIAL_AREA_INTERACTION_HPP
#define PERFSIM_SPATIAL_AREA_INTERACTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/spatial/coverage.hpp"
#include "perfsim/spatial/geometry.hpp"
#include "perfsim/trajectory.hpp"

namespace perfsim::spatial {

// One interaction scale: a gamma weight and a ball grain of the given
// radius.  Gammas are carried on a log10 scale so values like 1e-200 arrive
// without underflow; gamma >= 1 attracts, gamma <= 1 repels.
struct scale_term {
  double log10_gamma = 0.0;
  double radius = 0.0;
};

struct multiscale_params {
  double lambda = 1.0;
  window win;
  std::vector<scale_term> terms;
  double grid_h = 0.0;  // 0 picks the default: smallest grain radius / 20

  void validate() const {
    win.validate();
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw input_error("lambda must be positive and finite");
    for (const auto& t : terms) {
      if (!(t.radius > 0.0)) throw input_error("grain radius must be positive");
      if (!std::isfinite(t.log10_gamma)) throw input_error("log10 gamma must be finite");
    }
    // The canonical two-scale form is attraction at the large scale and
    // repulsion at the small scale; other orderings have no density bound.
    if (terms.size() == 2) {
      if (terms[0].log10_gamma < 0.0)
        throw input_error("two-scale model: gamma1 must be >= 1 (attractive term first)");
      if (terms[1].log10_gamma > 0.0)
        throw input_error("two-scale model: gamma2 must be <= 1 (repulsive term second)");
    }
  }

  double resolved_h() const {
    if (grid_h > 0.0) return grid_h;
    double r_min = std::numeric_limits<double>::infinity();
    for (const auto& t : terms) r_min = std::min(r_min, t.radius);
    if (!std::isfinite(r_min)) return win.shorter_side() / 100.0;  // Poisson: any grid works
    return r_min / 20.0;
  }
};

// Multiscale area-interaction density lambda^N * prod_g gamma_g^{-m(X (+) G_g)}
// as a factor model for the CFTP engine: one constant-rate factor plus one
// monotone factor per scale.  The conditional-intensity ratio of scale g at
// point u is gamma_g^{-added area}, where "added area" is the grid measure of
// the part of u's grain disc not already covered by the dilated pattern.
class multiscale_model {
 public:
  using site_type = planar_point;

  struct state_type {
    std::vector<planar_point> points;
    std::vector<std::uint64_t> ids;
    std::unordered_map<std::uint64_t, std::size_t> index;
  };

  explicit multiscale_model(const multiscale_params& p) : params_(p) {
    params_.validate();
    const double h = params_.resolved_h();
    double r_max = 0.0;
    for (const auto& t : params_.terms) r_max = std::max(r_max, t.radius);
    grid_ = grid_spec(params_.win, h, r_max + 2.0 * h);
    for (const auto& t : params_.terms) {
      term tt;
      tt.ln_gamma = t.log10_gamma * std::log(10.0);
      tt.radius = t.radius;
      tt.m_max = static_cast<double>(max_cells_per_disc(h, t.radius)) * h * h;
      terms_.push_back(tt);
    }
  }

  const multiscale_params& params() const { return params_; }
  const grid_spec& grid() const { return grid_; }
  double term_max_area(std::size_t g) const { return terms_[g].m_max; }

  // --- Model concept ---------------------------------------------------

  state_type make_state() const { return {}; }

  void insert(state_type& s, const site_type& p, std::uint64_t id) const {
    s.index.emplace(id, s.points.size());
    s.points.push_back(p);
    s.ids.push_back(id);
  }

  void erase(state_type& s, const site_type&, std::uint64_t id) const {
    const auto it = s.index.find(id);
    if (it == s.index.end()) throw internal_error("multiscale state: erase of unknown id");
    const std::size_t k = it->second;
    const std::size_t last = s.points.size() - 1;
    if (k != last) {
      s.points[k] = s.points[last];
      s.ids[k] = s.ids[last];
      s.index[s.ids[k]] = k;
    }
    s.points.pop_back();
    s.ids.pop_back();
    s.index.erase(it);
  }

  int factor_count() const { return 1 + static_cast<int>(terms_.size()); }

  double factor_log_ratio(int i, const site_type& u, const state_type& s) const {
    if (i == 0) return std::log(params_.lambda);
    const term& t = terms_[static_cast<std::size_t>(i - 1)];
    const double added = incremental_coverage_rowscan(u, t.radius, s.points, grid_);
    return -t.ln_gamma * added;
  }

  double factor_log_max(int i, const site_type&) const {
    if (i == 0) return std::log(params_.lambda);
    const term& t = terms_[static_cast<std::size_t>(i - 1)];
    // attractive (ln gamma >= 0): ratio <= 1; repulsive: ratio <= gamma^{-m_max}
    return t.ln_gamma >= 0.0 ? 0.0 : -t.ln_gamma * t.m_max;
  }

  double factor_log_min(int i, const site_type&) const {
    if (i == 0) return std::log(params_.lambda);
    const term& t = terms_[static_cast<std::size_t>(i - 1)];
    return t.ln_gamma >= 0.0 ? -t.ln_gamma * t.m_max : 0.0;
  }

  // --- Derived constants and helpers ------------------------------------

  // log of the dominating birth rate per unit area: lambda times the
  // repulsive terms' worst-case boosts.
  double log_dominating_density() const {
    double acc = std::log(params_.lambda);
    for (const auto& t : terms_)
      if (t.ln_gamma < 0.0) acc += -t.ln_gamma * t.m_max;
    return acc;
  }

  // log of the refined lower-initialization keep probability.
  double log_keep_probability() const {
    double acc = 0.0;
    for (const auto& t : terms_) acc -= std::fabs(t.ln_gamma) * t.m_max;
    return acc;
  }

  uniform_window_sampler sampler() const {
    return {params_.win.x0, params_.win.y0, params_.win.x1, params_.win.y1,
            std::exp(log_dominating_density())};
  }

  static pattern extract(const state_type& s, const window& w) {
    std::vector<std::pair<std::uint64_t, planar_point>> tagged;
    tagged.reserve(s.points.size());
    for (std::size_t k = 0; k < s.points.size(); ++k) tagged.emplace_back(s.ids[k], s.points[k]);
    std::sort(tagged.begin(), tagged.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    pattern out;
    out.win = w;
    out.points.reserve(tagged.size());
    for (const auto& [id, p] : tagged) out.points.push_back(p);
    return out;
  }

 private:
  struct term {
    double ln_gamma = 0.0;
    double radius = 0.0;
    double m_max = 0.0;
  };

  multiscale_params params_;
  grid_spec grid_;
  std::vector<term> terms_;
};

}  // namespace perfsim::spatial

#endif  // PERFSIM_SPATIAL_AREA_INTERACTION_HPP
