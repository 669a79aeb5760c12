#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "perfsim/cftp.hpp"
#include "perfsim/diagnostics.hpp"
#include "perfsim/errors.hpp"
#include "perfsim/rng.hpp"
#include "perfsim/spatial/area_interaction.hpp"
#include "perfsim/wavelet/lattice.hpp"

using perfsim::cftp_options;
using perfsim::mix_seed;
using perfsim::run_cftp;
using perfsim::wavelet::lattice_hyper;
using perfsim::wavelet::lattice_model;

namespace {

// 3-site lattice (2 levels): every neighbourhood is the whole site set, so
// the interaction exponent is 3 whenever any site is occupied.  Small enough
// to enumerate the posterior exactly from its density.
lattice_model toy_model() {
  lattice_hyper hyper;
  hyper.sigma = 1.0;
  hyper.tau = 1.0;
  hyper.lambda = 0.3;
  hyper.gamma = 2.0;
  return lattice_model({0.6, -0.4, 0.8}, hyper, 2);
}

// Unnormalized posterior of the count vector: per site the telescoped
// product of the two coefficient factors collapses to the integrated normal
// form exp{(d^2/2)(1/s2 - 1/(s2 + t2 k))} sqrt(s2/(s2 + t2 k)), and the
// occupancy factor contributes gamma^{-|union of neighbourhoods|}.
double toy_weight(const std::vector<int>& xi) {
  const double lam = 0.3, gam = 2.0, s2 = 1.0, t2 = 1.0;
  const double dh[] = {0.6, -0.4, 0.8};
  double w = 1.0;
  bool occupied = false;
  for (int s = 0; s < 3; ++s) {
    const double k = static_cast<double>(xi[s]);
    double site = std::pow(lam, k);
    for (int m = 2; m <= xi[s]; ++m) site /= static_cast<double>(m);
    site *= std::exp(0.5 * dh[s] * dh[s] * (1.0 / s2 - 1.0 / (s2 + t2 * k)));
    site *= std::sqrt(s2 / (s2 + t2 * k));
    w *= site;
    occupied = occupied || xi[s] > 0;
  }
  if (occupied) w *= std::pow(gam, -3.0);
  return w;
}

std::map<std::string, double> toy_exact_distribution() {
  std::map<std::string, double> pi;
  double total = 0.0;
  const int cap = 14;
  std::vector<int> xi(3);
  for (xi[0] = 0; xi[0] < cap; ++xi[0])
    for (xi[1] = 0; xi[1] < cap; ++xi[1])
      for (xi[2] = 0; xi[2] < cap; ++xi[2]) {
        const double w = toy_weight(xi);
        total += w;
        pi[std::to_string(xi[0]) + "," + std::to_string(xi[1]) + "," +
           std::to_string(xi[2])] += w;
      }
  for (auto& [k, v] : pi) v /= total;
  return pi;
}

}  // namespace

TEST_CASE("toy enumeration matches frozen reference probabilities", "[cftp]") {
  const auto pi = toy_exact_distribution();
  CHECK(std::abs(pi.at("0,0,0") - 0.8858903901692183) < 1e-12);
  CHECK(std::abs(pi.at("1,0,0") - 0.025702937719980574) < 1e-12);
  CHECK(std::abs(pi.at("0,0,1") - 0.02756661098694676) < 1e-12);
  CHECK(std::abs(pi.at("1,1,1") - 0.0014127137560801502) < 1e-12);
}

TEST_CASE("CFTP reproduces the enumerated posterior", "[cftp]") {
  const auto model = toy_model();
  const auto sampler = model.sampler();
  const std::size_t draws = 4000;
  std::map<std::string, double> freq;
  for (std::size_t i = 0; i < draws; ++i) {
    cftp_options opts;
    opts.seed = mix_seed(1000, i);
    const auto res = run_cftp(model, sampler, opts);
    REQUIRE(res.stats.coalesced);
    freq[std::to_string(res.state.xi[0]) + "," + std::to_string(res.state.xi[1]) + "," +
         std::to_string(res.state.xi[2])] += 1.0 / static_cast<double>(draws);
  }
  const auto pi = toy_exact_distribution();
  double tv = 0.0;
  for (const auto& [k, p] : pi) {
    const auto it = freq.find(k);
    tv += std::abs((it == freq.end() ? 0.0 : it->second) - p);
  }
  for (const auto& [k, f] : freq)
    if (pi.find(k) == pi.end()) tv += f;
  tv /= 2.0;
  INFO("TV distance " << tv);
  CHECK(tv < 0.05);
}

TEST_CASE("no interaction reduces to a Poisson sample", "[cftp]") {
  perfsim::spatial::multiscale_params p;
  p.lambda = 50.0;
  p.win = {0.0, 0.0, 1.0, 1.0};
  const perfsim::spatial::multiscale_model model(p);
  const auto sampler = model.sampler();
  const int draws = 300;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    cftp_options opts;
    opts.seed = mix_seed(2000, static_cast<std::uint64_t>(i));
    const auto res = run_cftp(model, sampler, opts);
    // with all factors constant the lower set equals the upper set at
    // initialization, so the very first horizon must coalesce
    CHECK(res.stats.doublings_used == 0);
    const double n = static_cast<double>(res.state.points.size());
    sum += n;
    sum2 += n * n;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  CHECK(std::abs(mean - 50.0) < 4.0 * std::sqrt(50.0 / draws));
  CHECK(std::abs(var - 50.0) < 4.0 * std::sqrt((50.0 + 2.0 * 2500.0) / draws));
}

TEST_CASE("identical seeds give identical draws", "[cftp]") {
  const auto model = toy_model();
  const auto sampler = model.sampler();
  cftp_options opts;
  opts.seed = 31337;
  const auto a = run_cftp(model, sampler, opts);
  const auto b = run_cftp(model, sampler, opts);
  CHECK(a.state.xi == b.state.xi);
  CHECK(a.stats.birth_events == b.stats.birth_events);
  CHECK(a.stats.final_horizon == b.stats.final_horizon);
  bool all_same = true;
  for (std::uint64_t s = 0; s < 50 && all_same; ++s) {
    cftp_options oa = opts, ob = opts;
    oa.seed = mix_seed(4000, s);
    ob.seed = mix_seed(4001, s);
    all_same = run_cftp(model, sampler, oa).state.xi == run_cftp(model, sampler, ob).state.xi;
  }
  CHECK_FALSE(all_same);
}

TEST_CASE("factor evaluations are exactly two per factor per birth", "[cftp]") {
  const auto model = toy_model();
  const auto sampler = model.sampler();
  for (std::uint64_t s = 0; s < 25; ++s) {
    cftp_options opts;
    opts.seed = mix_seed(5000, s);
    const auto res = run_cftp(model, sampler, opts);
    CHECK(res.stats.factor_evaluations ==
          2ull * static_cast<std::uint64_t>(model.factor_count()) * res.stats.birth_events);
  }
}

namespace {
struct counting_observer {
  int horizons = 0, inits = 0, births = 0, deaths = 0, processed = 0;
  template <typename E>
  void on_horizon_start(double, const E&) {
    ++horizons;
  }
  template <typename P>
  void on_init(double, const P&) {
    ++inits;
  }
  template <typename E, typename P, typename M>
  void on_birth(double, const E&, double, double, const P&, const M&) {
    ++births;
  }
  template <typename E, typename P>
  void on_death(double, const E&, const P&) {
    ++deaths;
  }
  template <typename P>
  void on_event_processed(double, const P&) {
    ++processed;
  }
};
}  // namespace

TEST_CASE("observer hooks fire once per event and per pass", "[cftp]") {
  const auto model = toy_model();
  const auto sampler = model.sampler();
  counting_observer obs;
  cftp_options opts;
  opts.seed = 808;
  const auto res = run_cftp(model, sampler, opts, obs);
  CHECK(obs.horizons == res.stats.doublings_used + 1);
  CHECK(obs.inits == obs.horizons);
  CHECK(obs.births == static_cast<int>(res.stats.birth_events));
  CHECK(obs.deaths == static_cast<int>(res.stats.death_events));
  CHECK(obs.processed == obs.births + obs.deaths);
}

TEST_CASE("coupling invariants hold under instrumentation", "[cftp]") {
  const auto model = toy_model();
  const auto sampler = model.sampler();
  for (std::uint64_t s = 0; s < 10; ++s) {
    perfsim::invariant_observer<lattice_model> obs;
    cftp_options opts;
    opts.seed = mix_seed(6000, s);
    run_cftp(model, sampler, opts, obs);
    obs.finalize();
    INFO((obs.violations.empty() ? "" : obs.violations.front()));
    CHECK(obs.violations.empty());
  }
}

TEST_CASE("hitting the doubling cap raises non-coalescence", "[cftp]") {
  // strong interaction plus a tight doubling cap: the sandwich cannot close
  // by the first horizon, and the error carries the diagnostics
  lattice_hyper hyper;
  hyper.sigma = 1.0;
  hyper.tau = 1.0;
  hyper.lambda = 5.0;
  hyper.gamma = 50.0;
  const lattice_model model({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, hyper, 3);
  const auto sampler = model.sampler();
  cftp_options opts;
  opts.seed = 2;
  opts.max_doublings = 0;
  try {
    run_cftp(model, sampler, opts);
    FAIL("expected non-coalescence");
  } catch (const perfsim::non_coalescence_error& e) {
    CHECK(e.code == perfsim::exit_code::non_coalescence);
    CHECK(e.upper_size > e.lower_size);
    CHECK(e.horizon == opts.block_length);
  }
}
