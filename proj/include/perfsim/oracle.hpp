#ifndef PERFSIM_ORACLE_HPP
#define PERFSIM_ORACLE_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/rng.hpp"
#include "perfsim/spatial/area_interaction.hpp"
#include "perfsim/spatial/coverage.hpp"
#include "perfsim/wavelet/lattice.hpp"

namespace perfsim::oracle {

// Independent exact samplers used to cross-check the coupling: plain
// dominated rejection, sharing nothing with the CFTP engine beyond the
// model definitions.  Tractable only when the dominating mass is small.

// Spatial case.  Propose from the dominating Poisson process; the density
// ratio against the proposal is
//   gamma_1^{-m_1(X)} * prod_g gamma_g-terms... <= 1
// because the attractive term's ratio is at most one and the repulsive
// term's exponent n * sup-disc-area - m_2(X) is nonnegative, so the
// rejection envelope constant is exactly one.
class spatial_oracle {
 public:
  explicit spatial_oracle(const spatial::multiscale_model& model) : model_(model) {
    for (std::size_t g = 0; g < model.params().terms.size(); ++g)
      fields_.emplace_back(model.grid(), model.params().terms[g].radius);
  }

  spatial::pattern draw(rng& r) {
    const auto& p = model_.params();
    const double log_dom = model_.log_dominating_density();
    const double mean = std::exp(log_dom) * p.win.area();
    const double log_lambda = std::log(p.lambda);
    for (;;) {
      ++proposals_;
      const auto n = r.poisson(mean);
      std::vector<planar_point> pts(n);
      for (auto& q : pts)
        q = {p.win.x0 + p.win.width() * r.uniform(), p.win.y0 + p.win.height() * r.uniform()};
      double log_acc = static_cast<double>(n) * (log_lambda - log_dom);
      for (std::size_t g = 0; g < p.terms.size(); ++g) {
        const double ln_gamma = p.terms[g].log10_gamma * std::log(10.0);
        // The fields persist across proposals; add/remove keeps them clean
        // without reallocating the dense grid every time.
        for (const auto& q : pts) fields_[g].add(q);
        log_acc -= ln_gamma * fields_[g].measure();
        for (const auto& q : pts) fields_[g].remove(q);
      }
      if (log_acc > 1e-9)
        throw internal_error("spatial rejection envelope violated (log = " +
                             std::to_string(log_acc) + ")");
      if (std::log(r.uniform_pos()) < log_acc) {
        spatial::pattern out;
        out.win = p.win;
        out.points = std::move(pts);
        return out;
      }
    }
  }

  std::uint64_t proposals() const { return proposals_; }

 private:
  const spatial::multiscale_model& model_;
  std::vector<spatial::coverage_field> fields_;
  std::uint64_t proposals_ = 0;
};

// Lattice case.  Counts are proposed independently per site from the
// dominating rates; the per-site likelihood part of the density ratio is
//   h_s(xi) = (lambda/lambda_dom_s)^xi * exp(-hat_d^2/(2(s2+t2 xi))) / sqrt(s2+t2 xi)
// (the telescoped product of the per-point factors), bounded by a
// numerically located supremum, and the neighbourhood part gamma^{-|U(xi)|}
// is at most one.
class lattice_oracle {
 public:
  explicit lattice_oracle(const wavelet::lattice_model& model) : model_(model) {
    const std::size_t sites = model_.site_count();
    for (std::size_t s = 0; s < sites; ++s)
      if (model_.tier(s) != wavelet::site_tier::simulated)
        throw input_error("lattice oracle requires every site in the simulated tier");
    const double s2 = model_.hyper().sigma * model_.hyper().sigma;
    const double t2 = model_.hyper().tau * model_.hyper().tau;
    dom_rate_.resize(sites);
    log_sup_h_.resize(sites);
    for (std::size_t s = 0; s < sites; ++s) {
      dom_rate_[s] = model_.hyper().lambda * std::exp(model_.rate_exponent(s));
      const double log_rate_ratio = std::log(model_.hyper().lambda) - std::log(dom_rate_[s]);
      const double d2 = model_.hat_detail(s) * model_.hat_detail(s);
      auto log_h = [&](int xi) {
        const double v = s2 + t2 * static_cast<double>(xi);
        return static_cast<double>(xi) * log_rate_ratio - d2 / (2.0 * v) - 0.5 * std::log(v);
      };
      constexpr int scan_max = 400;
      double best = log_h(0);
      int arg = 0;
      for (int xi = 1; xi <= scan_max; ++xi) {
        const double v = log_h(xi);
        if (v > best) {
          best = v;
          arg = xi;
        }
      }
      if (arg > scan_max - 50 || log_h(scan_max) >= log_h(scan_max - 1))
        throw internal_error("lattice oracle: supremum scan did not bracket the maximum");
      log_sup_h_[s] = best;
    }
  }

  std::vector<std::uint32_t> draw(rng& r) {
    const std::size_t sites = model_.site_count();
    const double ln_gamma = std::log(model_.hyper().gamma);
    std::vector<std::uint32_t> xi(sites);
    std::vector<char> covered(sites);
    const double s2 = model_.hyper().sigma * model_.hyper().sigma;
    const double t2 = model_.hyper().tau * model_.hyper().tau;
    for (;;) {
      ++proposals_;
      double log_acc = 0.0;
      for (std::size_t s = 0; s < sites; ++s) {
        xi[s] = static_cast<std::uint32_t>(r.poisson(dom_rate_[s]));
        const double v = s2 + t2 * static_cast<double>(xi[s]);
        const double d2 = model_.hat_detail(s) * model_.hat_detail(s);
        const double log_h = static_cast<double>(xi[s]) *
                                 (std::log(model_.hyper().lambda) - std::log(dom_rate_[s])) -
                             d2 / (2.0 * v) - 0.5 * std::log(v);
        log_acc += log_h - log_sup_h_[s];
      }
      std::fill(covered.begin(), covered.end(), 0);
      std::size_t n_covered = 0;
      for (std::size_t s = 0; s < sites; ++s)
        if (xi[s] > 0)
          for (std::uint32_t v : model_.neighbourhood(s))
            if (!covered[v]) {
              covered[v] = 1;
              ++n_covered;
            }
      log_acc -= ln_gamma * static_cast<double>(n_covered);
      if (log_acc > 1e-9)
        throw internal_error("lattice rejection envelope violated (log = " +
                             std::to_string(log_acc) + ")");
      if (std::log(r.uniform_pos()) < log_acc) return xi;
    }
  }

  std::uint64_t proposals() const { return proposals_; }

 private:
  const wavelet::lattice_model& model_;
  std::vector<double> dom_rate_;
  std::vector<double> log_sup_h_;
  std::uint64_t proposals_ = 0;
};

}  // namespace perfsim::oracle

#endif  // PERFSIM_ORACLE_HPP
