#ifndef PERFSIM_WAVELET_LATTICE_HPP
#define PERFSIM_WAVELET_LATTICE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/trajectory.hpp"
#include "perfsim/wavelet/transform.hpp"

namespace perfsim::wavelet {

// Hyperparameters of the lattice prior over wavelet coefficient indices and
// of the Gaussian observation model.
struct lattice_hyper {
  double sigma = 1.0;   // observation noise s.d.
  double tau = 1.0;     // prior coefficient s.d. scale
  double lambda = 0.05; // prior intensity per site
  double gamma = 3.0;   // uncovered-neighbourhood penalty, >= 1.
  // Sites whose dominating rate exceeds lambda * exp(threshold) leave the
  // simulated event space: above b they are treated as permanently occupied
  // (their posterior count is drawn from the dominating law instead), above
  // c the coefficient is drawn from the observation likelihood directly.
  double tier_b_log_threshold = 4.0;
  double tier_c_log_threshold = 20.0;

  void validate() const {
    if (!(sigma > 0.0) || !(tau > 0.0))
      throw input_error("lattice prior requires sigma > 0 and tau > 0");
    if (!(lambda > 0.0)) throw input_error("lattice prior requires lambda > 0");
    if (!(gamma >= 1.0)) throw input_error("lattice prior requires gamma >= 1");
    if (!(tier_b_log_threshold > 0.0) || !(tier_c_log_threshold >= tier_b_log_threshold))
      throw input_error("tier thresholds must satisfy 0 < b <= c");
  }
};

enum class site_tier : std::uint8_t { simulated, occupied_surrogate, direct_draw };

// Neighbourhoods on the pyramid of detail indices (level j holds 2^j sites,
// periodic in position).  B(x) contains x, its parent, the parent-level
// next-nearest coefficient on the side of x, the two same-level neighbours,
// the two children and the two child-level coefficients flanking them.
// Levels outside the pyramid are dropped, duplicates collapse, and the
// relation is symmetric: v in B(x) iff x in B(v).
inline std::vector<std::vector<std::uint32_t>> build_neighbourhoods(std::size_t levels) {
  const std::size_t sites = (std::size_t{1} << levels) - 1;
  std::vector<std::vector<std::uint32_t>> neigh(sites);
  for (std::size_t j = 0; j < levels; ++j) {
    const std::size_t width = std::size_t{1} << j;
    for (std::size_t k = 0; k < width; ++k) {
      std::vector<std::uint32_t> members;
      auto add = [&](std::size_t lev, std::ptrdiff_t pos) {
        const std::size_t w = std::size_t{1} << lev;
        const std::size_t wrapped = static_cast<std::size_t>(((pos % static_cast<std::ptrdiff_t>(w)) +
                                                              static_cast<std::ptrdiff_t>(w)) %
                                                             static_cast<std::ptrdiff_t>(w));
        members.push_back(static_cast<std::uint32_t>(flat_index(lev, wrapped)));
      };
      add(j, static_cast<std::ptrdiff_t>(k));
      add(j, static_cast<std::ptrdiff_t>(k) - 1);
      add(j, static_cast<std::ptrdiff_t>(k) + 1);
      if (j > 0) {
        const std::ptrdiff_t parent = static_cast<std::ptrdiff_t>(k / 2);
        add(j - 1, parent);
        add(j - 1, (k % 2 == 0) ? parent - 1 : parent + 1);
      }
      if (j + 1 < levels) {
        const std::ptrdiff_t left = 2 * static_cast<std::ptrdiff_t>(k);
        add(j + 1, left - 1);
        add(j + 1, left);
        add(j + 1, left + 1);
        add(j + 1, left + 2);
      }
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      neigh[flat_index(j, k)] = std::move(members);
    }
  }
  return neigh;
}

// Locally stable factor model for the posterior over coefficient counts.
// Density w.r.t. the unit-rate Poisson on sites: per point at site s with
// pre-insertion count xi,
//   ratio = lambda                                      (factor 0)
//         * gamma^{-#uncovered of B(s)}                 (factor 1)
//         * exp{ hat_d^2 tau^2 / (2 (s2+t2 xi)(s2+t2(xi+1))) }   (factor 2)
//         * sqrt{ (t2 xi + s2) / (t2 (xi+1) + s2) }     (factor 3)
// with s2 = sigma^2, t2 = tau^2.  Factor 2 decreases in xi, factors 1 and 3
// increase (in the covered-set ordering resp. xi), so the per-factor
// extrema below are sharp except factor 2's lower bound, which is the
// unattained infimum 1 -- still a valid bound.
class lattice_model {
 public:
  using site_type = std::uint32_t;

  struct state_type {
    std::vector<std::uint32_t> xi;     // point count per site
    std::vector<std::uint32_t> cover;  // # occupied sites in B(v), incl. surrogate base
  };

  lattice_model(std::vector<double> hat_d, lattice_hyper hyper, std::size_t levels)
      : hat_d_(std::move(hat_d)), hyper_(hyper), levels_(levels) {
    hyper_.validate();
    const std::size_t sites = (std::size_t{1} << levels_) - 1;
    if (hat_d_.size() != sites)
      throw input_error("detail coefficient count does not match lattice size");
    neigh_ = build_neighbourhoods(levels_);
    log_lambda_ = std::log(hyper_.lambda);
    ln_gamma_ = std::log(hyper_.gamma);
    const double s2 = hyper_.sigma * hyper_.sigma;
    const double t2 = hyper_.tau * hyper_.tau;
    rate_exponent_.resize(sites);
    tier_.resize(sites);
    for (std::size_t s = 0; s < sites; ++s) {
      rate_exponent_[s] = hat_d_[s] * hat_d_[s] * t2 / (2.0 * s2 * (t2 + s2));
      tier_[s] = rate_exponent_[s] > hyper_.tier_c_log_threshold ? site_tier::direct_draw
                 : rate_exponent_[s] > hyper_.tier_b_log_threshold
                     ? site_tier::occupied_surrogate
                     : site_tier::simulated;
    }
    base_cover_.assign(sites, 0);
    for (std::size_t v = 0; v < sites; ++v)
      for (std::uint32_t x : neigh_[v])
        if (tier_[x] != site_tier::simulated) ++base_cover_[v];
    max_neigh_ = 0;
    for (const auto& b : neigh_) max_neigh_ = std::max(max_neigh_, b.size());
  }

  state_type make_state() const {
    state_type st;
    st.xi.assign(hat_d_.size(), 0);
    st.cover = base_cover_;
    return st;
  }

  void insert(state_type& st, site_type s, std::uint64_t /*id*/) const {
    if (++st.xi[s] == 1)
      for (std::uint32_t v : neigh_[s]) ++st.cover[v];
  }

  void erase(state_type& st, site_type s, std::uint64_t /*id*/) const {
    if (--st.xi[s] == 0)
      for (std::uint32_t v : neigh_[s]) --st.cover[v];
  }

  int factor_count() const { return 4; }

  double factor_log_ratio(int i, site_type s, const state_type& st) const {
    const double s2 = hyper_.sigma * hyper_.sigma;
    const double t2 = hyper_.tau * hyper_.tau;
    switch (i) {
      case 0:
        return log_lambda_;
      case 1: {
        std::size_t uncovered = 0;
        for (std::uint32_t v : neigh_[s])
          if (st.cover[v] == 0) ++uncovered;
        return -ln_gamma_ * static_cast<double>(uncovered);
      }
      case 2: {
        const double xi = static_cast<double>(st.xi[s]);
        return hat_d_[s] * hat_d_[s] * t2 / (2.0 * (s2 + t2 * xi) * (s2 + t2 * (xi + 1.0)));
      }
      default: {
        const double xi = static_cast<double>(st.xi[s]);
        return 0.5 * std::log((t2 * xi + s2) / (t2 * (xi + 1.0) + s2));
      }
    }
  }

  double factor_log_max(int i, site_type s) const {
    switch (i) {
      case 0: return log_lambda_;
      case 1: return 0.0;
      case 2: return rate_exponent_[s];
      default: return 0.0;
    }
  }

  double factor_log_min(int i, site_type /*s*/) const {
    const double s2 = hyper_.sigma * hyper_.sigma;
    const double t2 = hyper_.tau * hyper_.tau;
    switch (i) {
      case 0: return log_lambda_;
      case 1: return -ln_gamma_ * static_cast<double>(max_neigh_);
      case 2: return 0.0;
      default: return 0.5 * std::log(s2 / (t2 + s2));
    }
  }

  // Event-space rates: simulated sites carry their dominating rate, excluded
  // tiers carry zero and are handled outside the sampler.
  site_table_sampler sampler() const {
    std::vector<double> rates(hat_d_.size(), 0.0);
    for (std::size_t s = 0; s < hat_d_.size(); ++s)
      if (tier_[s] == site_tier::simulated)
        rates[s] = hyper_.lambda * std::exp(rate_exponent_[s]);
    return site_table_sampler(std::move(rates));
  }

  bool has_simulated_sites() const {
    return std::any_of(tier_.begin(), tier_.end(),
                       [](site_tier t) { return t == site_tier::simulated; });
  }

  std::size_t site_count() const { return hat_d_.size(); }
  std::size_t levels() const { return levels_; }
  const std::vector<std::uint32_t>& neighbourhood(std::size_t s) const { return neigh_[s]; }
  site_tier tier(std::size_t s) const { return tier_[s]; }
  double rate_exponent(std::size_t s) const { return rate_exponent_[s]; }
  double hat_detail(std::size_t s) const { return hat_d_[s]; }
  const lattice_hyper& hyper() const { return hyper_; }
  std::size_t max_neighbourhood_size() const { return max_neigh_; }

 private:
  std::vector<double> hat_d_;
  lattice_hyper hyper_;
  std::size_t levels_;
  std::vector<std::vector<std::uint32_t>> neigh_;
  std::vector<double> rate_exponent_;
  std::vector<site_tier> tier_;
  std::vector<std::uint32_t> base_cover_;
  double log_lambda_ = 0.0;
  double ln_gamma_ = 0.0;
  std::size_t max_neigh_ = 0;
};

}  // namespace perfsim::wavelet

#endif  // PERFSIM_WAVELET_LATTICE_HPP
