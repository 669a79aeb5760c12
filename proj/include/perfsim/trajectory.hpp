#ifndef PERFSIM_TRAJECTORY_HPP
#define PERFSIM_TRAJECTORY_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/rng.hpp"

namespace perfsim {

// One event of the dominating birth-death process.  Everything about the
// event (site, times, acceptance mark) is drawn once, when the event is first
// generated, and never touched again; backward extensions only add events.
template <typename Site>
struct marked_event {
  std::uint64_t id = 0;
  Site site{};
  double mark = 0.0;   // U[0,1) acceptance mark
  double birth = 0.0;  // birth < death
  double death = 0.0;  // +infinity when the point is still alive at time 0
};

inline constexpr double survives_to_zero = std::numeric_limits<double>::infinity();

// The dominating process on (-inf, 0], materialized lazily.
//
// Construction runs in reversed time.  The stationary immigration-death
// process with immigration rate R and unit per-point death rate is
// reversible, so looking backwards from 0 its deaths form a Poisson process
// of rate R and the age at death is Exp(1), independent of everything else.
// Concretely:
//   - stream 0 draws the time-0 cross-section: Poisson(R) points, each with
//     age Exp(1) (birth = -age) and death = +infinity;
//   - stream b+1 draws block b, the events dying in (-(b+1)*T0, -b*T0]:
//     Poisson(R*T0) of them, death uniform in the block, birth = death - Exp(1).
// Every event affecting [-T, 0] for T a multiple of T0 lies in the
// cross-section or in blocks 0..T/T0-1, so extending the horizon means
// generating more blocks and nothing else.  Keying streams by block index
// (not by extension count) makes the event set on [-T, 0] independent of the
// extension schedule: two extensions S1 then S2 produce bit-identical events
// to a single extension S1+S2.
//
// SiteSampler must provide: site_type, total_rate(), sample(rng&).
template <typename SiteSampler>
class trajectory {
 public:
  using site_type = typename SiteSampler::site_type;
  using event_type = marked_event<site_type>;

  trajectory(SiteSampler sampler, double block_length, std::uint64_t seed)
      : sampler_(std::move(sampler)), block_length_(block_length), seed_(seed) {
    if (!(block_length_ > 0.0)) throw input_error("trajectory: block length must be positive");
    if (!(sampler_.total_rate() > 0.0) || !std::isfinite(sampler_.total_rate()))
      throw input_error("trajectory: total dominating rate must be positive and finite");
    generate_cross_section();
  }

  double block_length() const { return block_length_; }
  double horizon() const { return static_cast<double>(blocks_.size()) * block_length_; }

  // Extend so that all events with death > -T exist.
  void ensure_horizon(double T) {
    while (horizon() < T) generate_block(blocks_.size());
  }

  const std::vector<event_type>& cross_section_at_zero() const { return cross_; }
  const std::vector<event_type>& block(std::size_t b) const { return blocks_[b]; }
  std::size_t block_count() const { return blocks_.size(); }

  // All events relevant to [-T, 0]: those alive at 0 plus those dying in
  // (-T, 0].  T must not exceed the generated horizon.
  std::vector<const event_type*> events_for_horizon(double T) const {
    if (T > horizon() + 1e-12)
      throw internal_error("trajectory: horizon not generated before use");
    std::vector<const event_type*> out;
    out.reserve(cross_.size() + 64);
    for (const auto& e : cross_) out.push_back(&e);
    const auto nb = static_cast<std::size_t>(T / block_length_ + 0.5);
    for (std::size_t b = 0; b < nb && b < blocks_.size(); ++b)
      for (const auto& e : blocks_[b]) out.push_back(&e);
    return out;
  }

 private:
  void generate_cross_section() {
    rng r(seed_, 0);
    const auto n = r.poisson(sampler_.total_rate());
    cross_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      event_type e;
      e.id = i;  // stream 0 owns the id block with high bits zero
      e.birth = -r.exponential();
      e.death = survives_to_zero;
      e.site = sampler_.sample(r);
      e.mark = r.uniform();
      cross_.push_back(e);
    }
  }

  void generate_block(std::size_t b) {
    rng r(seed_, b + 1);
    const double t0 = static_cast<double>(b) * block_length_;
    const auto n = r.poisson(sampler_.total_rate() * block_length_);
    std::vector<event_type> ev;
    ev.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      event_type e;
      e.id = (static_cast<std::uint64_t>(b + 1) << 40) | i;
      const double rev = t0 + block_length_ * r.uniform();
      e.death = -rev;
      e.birth = e.death - r.exponential();
      e.site = sampler_.sample(r);
      e.mark = r.uniform();
      ev.push_back(e);
    }
    blocks_.push_back(std::move(ev));
  }

  SiteSampler sampler_;
  double block_length_;
  std::uint64_t seed_;
  std::vector<event_type> cross_;
  std::vector<std::vector<event_type>> blocks_;
};

// Homogeneous rate over a rectangle; sites are planar points.
struct planar_point {
  double x = 0.0;
  double y = 0.0;
};

struct uniform_window_sampler {
  using site_type = planar_point;
  double x0, y0, x1, y1;
  double rate_per_unit_area;

  double total_rate() const { return rate_per_unit_area * (x1 - x0) * (y1 - y0); }
  site_type sample(rng& r) const {
    return {x0 + (x1 - x0) * r.uniform(), y0 + (y1 - y0) * r.uniform()};
  }
};

// Per-site rate table; sites are flat indices into the table.
struct site_table_sampler {
  using site_type = std::uint32_t;
  std::vector<double> cumulative;  // strictly increasing partial sums
  double total = 0.0;

  explicit site_table_sampler(const std::vector<double>& rates) {
    cumulative.reserve(rates.size());
    for (double v : rates) {
      if (v < 0.0 || !std::isfinite(v))
        throw input_error("site rates must be finite and nonnegative");
      total += v;
      cumulative.push_back(total);
    }
    if (!(total > 0.0)) throw input_error("site rate table sums to zero");
  }

  double total_rate() const { return total; }
  site_type sample(rng& r) const {
    const double u = r.uniform() * total;
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cumulative[mid] <= u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return static_cast<site_type>(lo);
  }
};

}  // namespace perfsim

#endif  // PERFSIM_TRAJECTORY_HPP
