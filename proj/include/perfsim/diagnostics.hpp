#ifndef PERFSIM_DIAGNOSTICS_HPP
#define PERFSIM_DIAGNOSTICS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "perfsim/cftp.hpp"

namespace perfsim {

// Instrumentation observer for the coupling invariants.  It watches a full
// run and records a description of every violation:
//   - funnelling: the lower id set stays a subset of the upper id set;
//   - acceptance bracket: per birth, log acceptance bounds are ordered and
//     at most zero, and the mark routes the point consistently;
//   - absorption: once the processes meet within a pass, they stay equal;
//   - horizon nesting: at time 0, lower sets grow and upper sets shrink as
//     the start horizon doubles.
template <typename Model>
struct invariant_observer {
  std::vector<std::string> violations;
  std::uint64_t births_seen = 0;
  std::uint64_t events_seen = 0;
  int horizons_seen = 0;
  double slack = 1e-9;

  using id_set = std::unordered_set<std::uint64_t>;

  id_set last_upper, last_lower;      // live snapshot within the pass
  id_set prev_upper0, prev_lower0;    // time-0 sets of the previous horizon
  bool have_prev = false;
  bool met_this_pass = false;

  void note(const std::string& msg) { violations.push_back(msg); }

  template <typename Events>
  void on_horizon_start(double /*T*/, const Events& /*events*/) {
    if (horizons_seen > 0) commit_pass_end();
    ++horizons_seen;
    met_this_pass = false;
  }

  template <typename Pair>
  void on_init(double /*T*/, const Pair& pair) {
    check_subset(pair, "init");
    last_upper = pair.upper_ids;
    last_lower = pair.lower_ids;
    if (pair.lower_ids.size() == pair.upper_ids.size()) met_this_pass = true;
  }

  template <typename Event, typename Pair, typename M>
  void on_birth(double /*time*/, const Event& e, double log_acc_up, double log_acc_low,
                const Pair& pair, const M& /*model*/) {
    ++births_seen;
    if (log_acc_low > log_acc_up + 1e-12)
      note("acceptance bounds out of order at event " + std::to_string(e.id));
    if (log_acc_up > slack)
      note("upper acceptance above one at event " + std::to_string(e.id));
    const double log_mark = std::log(e.mark);
    const bool in_up = pair.upper_ids.count(e.id) != 0;
    const bool in_low = pair.lower_ids.count(e.id) != 0;
    if ((log_mark < log_acc_up) != in_up)
      note("upper routing mismatch at event " + std::to_string(e.id));
    if ((log_mark < log_acc_low) != in_low)
      note("lower routing mismatch at event " + std::to_string(e.id));
    if (in_low && !in_up) note("lower-only insertion at event " + std::to_string(e.id));
    check_subset(pair, "birth");
  }

  template <typename Event, typename Pair>
  void on_death(double /*time*/, const Event& e, const Pair& pair) {
    (void)e;
    check_subset(pair, "death");
  }

  template <typename Pair>
  void on_event_processed(double /*time*/, const Pair& pair) {
    ++events_seen;
    const bool equal = pair.lower_ids.size() == pair.upper_ids.size();
    if (met_this_pass && !equal) note("processes separated again after meeting");
    if (equal) met_this_pass = true;
    last_upper = pair.upper_ids;
    last_lower = pair.lower_ids;
  }

  // Call after run_cftp returns to fold in the final pass.
  void finalize() { commit_pass_end(); }

 private:
  template <typename Pair>
  void check_subset(const Pair& pair, const char* where) {
    for (std::uint64_t id : pair.lower_ids)
      if (pair.upper_ids.count(id) == 0) {
        note(std::string("funnelling violated at ") + where + ": id " + std::to_string(id) +
             " in lower only");
        return;
      }
  }

  void commit_pass_end() {
    if (have_prev) {
      for (std::uint64_t id : prev_lower0)
        if (last_lower.count(id) == 0)
          note("horizon nesting violated: lower set lost id " + std::to_string(id));
      for (std::uint64_t id : last_upper)
        if (prev_upper0.count(id) == 0)
          note("horizon nesting violated: upper set gained id " + std::to_string(id));
    }
    prev_upper0 = last_upper;
    prev_lower0 = last_lower;
    have_prev = true;
  }
};

}  // namespace perfsim

#endif  // PERFSIM_DIAGNOSTICS_HPP
