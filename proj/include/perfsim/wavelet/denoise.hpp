#ifndef PERFSIM_WAVELET_DENOISE_HPP
#define PERFSIM_WAVELET_DENOISE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "perfsim/cftp.hpp"
#include "perfsim/errors.hpp"
#include "perfsim/rng.hpp"
#include "perfsim/util/parallel.hpp"
#include "perfsim/wavelet/lattice.hpp"
#include "perfsim/wavelet/transform.hpp"

namespace perfsim::wavelet {

struct denoise_options {
  family wavelet = family::la10;
  std::uint64_t seed = 1;
  int workers = 0;           // 0 = PERFSIM_WORKERS env or hardware
  double block_length = 2.0; // backward time step for the coupling
  int max_doublings = 30;
};

struct denoise_result {
  std::vector<double> estimate;          // denoised signal, same length as input
  std::vector<double> median_details;    // flat posterior-median detail coefficients
  double scaling = 0.0;                  // passed through unshrunk
  std::size_t simulated_sites = 0;
  std::size_t surrogate_sites = 0;
  std::size_t direct_sites = 0;
  std::vector<run_stats> runs;                    // one exact-sampling run per draw
  std::vector<std::vector<double>> draw_details;  // draws x sites
  std::vector<std::vector<std::uint32_t>> draw_counts;
};

namespace detail {

// One exact posterior draw of (counts, coefficients) on the lattice.  The
// sampler is null when every site left the event space.
inline void posterior_draw(const lattice_model& model, const site_table_sampler* sampler,
                           std::uint64_t draw_seed, double block_length, int max_doublings,
                           std::vector<std::uint32_t>& xi, std::vector<double>& d,
                           run_stats& stats) {
  const std::size_t sites = model.site_count();
  xi.assign(sites, 0);
  d.assign(sites, 0.0);
  stats = run_stats{};

  if (sampler != nullptr) {
    cftp_options opts;
    opts.block_length = block_length;
    opts.max_doublings = max_doublings;
    opts.seed = draw_seed;
    auto result = run_cftp(model, *sampler, opts);
    xi = result.state.xi;
    stats = result.stats;
  }

  // Sites removed from the event space: above the first threshold the
  // acceptance ratio is so close to one that the dominating count is used
  // for the posterior count; above the second the coefficient is drawn from
  // the observation likelihood directly and the count is not needed.
  rng surrogate_rng(draw_seed, 0x53555247u);
  rng coef_rng(draw_seed, 0x434f4546u);
  const double s2 = model.hyper().sigma * model.hyper().sigma;
  const double t2 = model.hyper().tau * model.hyper().tau;
  for (std::size_t s = 0; s < sites; ++s)
    if (model.tier(s) == site_tier::occupied_surrogate) {
      // The count only enters the posterior through the shrinkage factor
      // k/(k + s2/t2), which saturates long before the count type's range is
      // threatened, so huge dominating rates are capped rather than drawn
      // literally (the relative posterior error of the cap is O(s2/(t2 k))).
      const double mean =
          std::min(model.hyper().lambda * std::exp(model.rate_exponent(s)), 1e9);
      xi[s] = static_cast<std::uint32_t>(surrogate_rng.poisson(mean));
    }
  for (std::size_t s = 0; s < sites; ++s) {
    switch (model.tier(s)) {
      case site_tier::direct_draw:
        d[s] = coef_rng.normal(model.hat_detail(s), model.hyper().sigma);
        break;
      default: {
        const double k = static_cast<double>(xi[s]);
        if (k == 0.0) {
          d[s] = 0.0;  // empty site pins the coefficient at exactly zero
        } else {
          const double denom = s2 + t2 * k;
          const double mean = t2 * k * model.hat_detail(s) / denom;
          const double sd = std::sqrt(s2 * t2 * k / denom);
          d[s] = coef_rng.normal(mean, sd);
        }
        break;
      }
    }
  }
}

inline double lower_median(std::vector<double> v) {
  const std::size_t mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

}  // namespace detail

// Bayesian curve estimate: R exact posterior draws of the coefficient
// vector, coordinatewise (lower) medians, inverse transform.  Scaling
// coefficients are left untouched.
inline denoise_result denoise(const std::vector<double>& signal, const lattice_hyper& hyper,
                              int draws, const denoise_options& opts) {
  if (draws < 1) throw input_error("draws must be at least 1");
  coefficient_tree tree = dwt(signal, opts.wavelet);
  const std::vector<double> hat_d = flatten_details(tree);

  lattice_model model(hat_d, hyper, tree.levels);
  std::optional<site_table_sampler> sampler;
  if (model.has_simulated_sites()) sampler.emplace(model.sampler());

  denoise_result res;
  res.scaling = tree.scaling;
  for (std::size_t s = 0; s < model.site_count(); ++s) switch (model.tier(s)) {
      case site_tier::simulated: ++res.simulated_sites; break;
      case site_tier::occupied_surrogate: ++res.surrogate_sites; break;
      case site_tier::direct_draw: ++res.direct_sites; break;
    }

  res.runs.resize(static_cast<std::size_t>(draws));
  res.draw_details.resize(static_cast<std::size_t>(draws));
  res.draw_counts.resize(static_cast<std::size_t>(draws));
  parallel_for(static_cast<std::size_t>(draws), resolve_workers(opts.workers), [&](std::size_t t) {
    const std::uint64_t draw_seed = mix_seed(opts.seed, t + 1);
    detail::posterior_draw(model, sampler ? &*sampler : nullptr, draw_seed, opts.block_length,
                           opts.max_doublings, res.draw_counts[t], res.draw_details[t],
                           res.runs[t]);
  });

  res.median_details.resize(model.site_count());
  std::vector<double> column(static_cast<std::size_t>(draws));
  for (std::size_t s = 0; s < model.site_count(); ++s) {
    for (std::size_t t = 0; t < static_cast<std::size_t>(draws); ++t)
      column[t] = res.draw_details[t][s];
    res.median_details[s] = detail::lower_median(column);
  }

  unflatten_details(res.median_details, tree);
  res.estimate = idwt(tree, opts.wavelet);
  return res;
}

}  // namespace perfsim::wavelet

#endif  // PERFSIM_WAVELET_DENOISE_HPP
