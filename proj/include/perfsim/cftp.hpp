#ifndef PERFSIM_CFTP_HPP
#define PERFSIM_CFTP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/trajectory.hpp"

namespace perfsim {

// Dominated CFTP for locally stable densities written as a product of
// monotone factors.  A Model describes the factors; the engine owns the
// algorithm: dominating trajectory, refined lower initialization, the
// factorized acceptance step, coalescence detection and backward doubling.
//
// Model concept:
//   site_type, state_type (copyable)
//   state_type make_state() const
//   void insert(state_type&, const site_type&, uint64_t id) const
//   void erase(state_type&, const site_type&, uint64_t id) const
//   int  factor_count() const
//   double factor_log_ratio(int i, const site_type&, const state_type&) const
//       log of the i-th factor's conditional-intensity ratio at this site
//   double factor_log_max(int i, const site_type&) const
//       log of a bound >= the ratio over all configurations
//   double factor_log_min(int i, const site_type&) const
//       log of a bound <= the ratio over all configurations (may be -inf)
//
// The engine derives everything else:
//   log dominating rate(site) = sum_i factor_log_max(i, site)
//   lower-init keep probability(site)
//       = exp(sum_i factor_log_min(i, site) - log dominating rate(site))
// Monotonicity of each factor means its extreme ratios over every
// configuration sandwiched between lower and upper are attained at lower or
// upper themselves, so each birth event needs exactly two ratio evaluations
// per factor, never an enumeration of intermediate configurations.

struct run_stats {
  std::uint64_t birth_events = 0;
  std::uint64_t death_events = 0;
  std::uint64_t factor_evaluations = 0;
  std::uint64_t initial_points = 0;
  double final_horizon = 0.0;
  int doublings_used = 0;
  bool coalesced = false;
};

struct cftp_options {
  double block_length = 2.0;  // T0: first horizon and trajectory block size
  int max_doublings = 30;
  std::uint64_t seed = 1;
  // Tolerance for the internal "acceptance probability <= 1" consistency
  // check; violations beyond this signal a wrong bound in the model.
  double bound_slack = 1e-9;
};

template <typename Model>
struct sandwich_pair {
  typename Model::state_type upper;
  typename Model::state_type lower;
  std::unordered_set<std::uint64_t> upper_ids;
  std::unordered_set<std::uint64_t> lower_ids;
};

template <typename Model>
struct cftp_result {
  typename Model::state_type state;  // coalesced configuration at time 0
  run_stats stats;
};

namespace detail {

struct null_observer {
  template <typename... A>
  void on_horizon_start(A&&...) {}
  template <typename... A>
  void on_init(A&&...) {}
  template <typename... A>
  void on_birth(A&&...) {}
  template <typename... A>
  void on_death(A&&...) {}
  template <typename... A>
  void on_event_processed(A&&...) {}
};

template <typename Model>
double log_dominating_rate(const Model& m, const typename Model::site_type& s) {
  double acc = 0.0;
  for (int i = 0; i < m.factor_count(); ++i) acc += m.factor_log_max(i, s);
  return acc;
}

template <typename Model>
double log_keep_probability(const Model& m, const typename Model::site_type& s) {
  double acc = 0.0;
  for (int i = 0; i < m.factor_count(); ++i) acc += m.factor_log_min(i, s);
  return acc - log_dominating_rate(m, s);
}

}  // namespace detail

// Initial sandwich at -T: the upper process starts from the full dominating
// cross-section; the lower process keeps the points whose mark clears the
// product of per-factor minimal ratios over the dominating rate, which is
// exactly the set no acceptance decision could ever reject.
template <typename Model, typename Event>
sandwich_pair<Model> init_pair(const Model& model, const std::vector<const Event*>& events,
                               double T, run_stats* stats = nullptr) {
  sandwich_pair<Model> pair{model.make_state(), model.make_state(), {}, {}};
  for (const Event* e : events) {
    if (e->birth <= -T && e->death > -T) {
      model.insert(pair.upper, e->site, e->id);
      pair.upper_ids.insert(e->id);
      const double log_mark = std::log(e->mark);
      if (log_mark < detail::log_keep_probability(model, e->site)) {
        model.insert(pair.lower, e->site, e->id);
        pair.lower_ids.insert(e->id);
      }
      if (stats) ++stats->initial_points;
    }
  }
  return pair;
}

// Forward evolution from -T to 0.  Each birth is accepted into the upper
// process iff its mark clears the product of per-factor maxima over
// {upper, lower}, and into the lower process iff it clears the product of
// per-factor minima; deaths remove the point from whichever processes hold
// it.  Exactly 2 * factor_count() ratio evaluations happen per birth event.
template <typename Model, typename Event, typename Observer = detail::null_observer>
void evolve_pair(const Model& model, sandwich_pair<Model>& pair,
                 const std::vector<const Event*>& events, double T, const cftp_options& opts,
                 run_stats& stats, Observer&& obs = Observer{}) {
  struct record {
    double time;
    bool is_death;
    const Event* event;
  };
  std::vector<record> timeline;
  timeline.reserve(events.size());
  for (const Event* e : events) {
    if (e->birth > -T) timeline.push_back({e->birth, false, e});
    if (e->death > -T && e->death <= 0.0) timeline.push_back({e->death, true, e});
  }
  std::sort(timeline.begin(), timeline.end(), [](const record& a, const record& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.is_death != b.is_death) return a.is_death < b.is_death;
    return a.event->id < b.event->id;
  });

  const int m = model.factor_count();
  for (const record& rec : timeline) {
    const Event& e = *rec.event;
    if (rec.is_death) {
      if (pair.upper_ids.erase(e.id)) model.erase(pair.upper, e.site, e.id);
      if (pair.lower_ids.erase(e.id)) model.erase(pair.lower, e.site, e.id);
      ++stats.death_events;
      obs.on_death(rec.time, e, pair);
    } else {
      double log_acc_up = 0.0;
      double log_acc_low = 0.0;
      for (int i = 0; i < m; ++i) {
        const double at_upper = model.factor_log_ratio(i, e.site, pair.upper);
        const double at_lower = model.factor_log_ratio(i, e.site, pair.lower);
        stats.factor_evaluations += 2;
        log_acc_up += std::max(at_upper, at_lower);
        log_acc_low += std::min(at_upper, at_lower);
      }
      const double log_dom = detail::log_dominating_rate(model, e.site);
      log_acc_up -= log_dom;
      log_acc_low -= log_dom;
      if (log_acc_up > opts.bound_slack)
        throw internal_error(
            "factor bound violated: acceptance probability above one (log = " +
            std::to_string(log_acc_up) + ")");
      const double log_mark = std::log(e.mark);
      if (log_mark < log_acc_up) {
        model.insert(pair.upper, e.site, e.id);
        pair.upper_ids.insert(e.id);
        if (log_mark < log_acc_low) {
          model.insert(pair.lower, e.site, e.id);
          pair.lower_ids.insert(e.id);
        }
      }
      ++stats.birth_events;
      obs.on_birth(rec.time, e, log_acc_up, log_acc_low, pair, model);
    }
    obs.on_event_processed(rec.time, pair);
  }
}

// The dominated-CFTP loop: evolve the sandwich from horizons T0, 2*T0,
// 4*T0, ... over one shared trajectory until the processes meet at time 0.
// Reusing the trajectory (events, marks and all) across horizons is what
// makes the coupled runs funnel instead of restarting.
template <typename Model, typename Sampler, typename Observer = detail::null_observer>
cftp_result<Model> run_cftp(const Model& model, const Sampler& sampler,
                            const cftp_options& opts = {}, Observer&& obs = Observer{}) {
  trajectory<Sampler> traj(sampler, opts.block_length, opts.seed);
  run_stats total;
  double T = opts.block_length;
  for (int k = 0; k <= opts.max_doublings; ++k, T *= 2.0) {
    traj.ensure_horizon(T);
    const auto events = traj.events_for_horizon(T);
    obs.on_horizon_start(T, events);
    run_stats pass;
    auto pair = init_pair(model, events, T, &pass);
    obs.on_init(T, pair);
    evolve_pair(model, pair, events, T, opts, pass, obs);
    total.birth_events += pass.birth_events;
    total.death_events += pass.death_events;
    total.factor_evaluations += pass.factor_evaluations;
    total.initial_points = pass.initial_points;
    total.final_horizon = T;
    total.doublings_used = k;
    if (pair.lower_ids.size() == pair.upper_ids.size()) {
      total.coalesced = true;
      return {std::move(pair.upper), total};
    }
    if (k == opts.max_doublings) {
      throw non_coalescence_error(
          pair.upper_ids.size(), pair.lower_ids.size(), T,
          "CFTP did not coalesce by horizon " + std::to_string(T) + " (upper " +
              std::to_string(pair.upper_ids.size()) + ", lower " +
              std::to_string(pair.lower_ids.size()) + " points)");
    }
  }
  throw internal_error("unreachable: doubling loop exited without a result");
}

}  // namespace perfsim

#endif  // PERFSIM_CFTP_HPP
