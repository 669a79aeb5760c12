// perfsim: exact sampling for locally stable point processes, with two
// front-end applications: multiscale area-interaction patterns in the plane
// (simulate, envelope) and Bayesian wavelet curve estimation (denoise,
// study).  All artifacts are CSV/SVG and every run is reproducible from the
// emitted config echo.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "perfsim/cftp.hpp"
#include "perfsim/diagnostics.hpp"
#include "perfsim/errors.hpp"
#include "perfsim/io/config.hpp"
#include "perfsim/io/csv.hpp"
#include "perfsim/io/svg.hpp"
#include "perfsim/oracle.hpp"
#include "perfsim/rng.hpp"
#include "perfsim/spatial/area_interaction.hpp"
#include "perfsim/stats/summary.hpp"
#include "perfsim/trajectory.hpp"
#include "perfsim/util/parallel.hpp"
#include "perfsim/wavelet/denoise.hpp"
#include "perfsim/wavelet/signals.hpp"
#include "perfsim/wavelet/study.hpp"
#include "perfsim/wavelet/transform.hpp"

namespace fs = std::filesystem;
using perfsim::cftp_options;
using perfsim::input_error;
using perfsim::mix_seed;
using perfsim::planar_point;
using perfsim::rng;
using perfsim::run_cftp;
using perfsim::run_stats;

// ---------------------------------------------------------------------------
// Shared plumbing

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw input_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::string sanitize_csv_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

perfsim::spatial::multiscale_params spatial_params_from_config(const perfsim::io::config& cfg) {
  perfsim::spatial::multiscale_params p;
  p.lambda = cfg.require_double("lambda");
  p.win.x0 = cfg.get_double("window_x0", 0.0);
  p.win.y0 = cfg.get_double("window_y0", 0.0);
  p.win.x1 = cfg.get_double("window_x1", 1.0);  // unit square unless overridden
  p.win.y1 = cfg.get_double("window_y1", 1.0);
  p.grid_h = cfg.get_double("grid_h", 0.0);
  if (cfg.has("log10_gamma1") || cfg.has("r1"))
    p.terms.push_back({cfg.require_double("log10_gamma1"), cfg.require_double("r1")});
  if (cfg.has("log10_gamma2") || cfg.has("r2")) {
    if (p.terms.empty())
      throw input_error("log10_gamma2/r2 given without log10_gamma1/r1");
    p.terms.push_back({cfg.require_double("log10_gamma2"), cfg.require_double("r2")});
  }
  return p;
}

const std::set<std::string> spatial_model_keys = {
    "lambda", "window_x0", "window_y0", "window_x1", "window_y1",
    "log10_gamma1", "r1", "log10_gamma2", "r2", "grid_h"};

void add_spatial_echo(perfsim::io::config& echo, const perfsim::spatial::multiscale_model& model) {
  const auto& p = model.params();
  echo.set("derived_grid_h", model.grid().h);
  echo.set("derived_grid_nx", static_cast<std::uint64_t>(model.grid().nx));
  echo.set("derived_grid_ny", static_cast<std::uint64_t>(model.grid().ny));
  for (std::size_t g = 0; g < p.terms.size(); ++g)
    echo.set("derived_sup_disc_area_" + std::to_string(g + 1), model.term_max_area(g));
  echo.set("derived_log_dominating_density", model.log_dominating_density());
  echo.set("derived_dominating_mean_count",
           std::exp(model.log_dominating_density()) * p.win.area());
  echo.set("derived_log_keep_probability", model.log_keep_probability());
}

void write_pattern_svg(const std::string& path, const perfsim::spatial::pattern& pat,
                       const std::string& title) {
  perfsim::io::plot_spec spec;
  spec.title = title;
  spec.x_label = "x";
  spec.y_label = "y";
  spec.equal_aspect = true;
  perfsim::io::plot_series frame;
  frame.x = {pat.win.x0, pat.win.x1, pat.win.x1, pat.win.x0, pat.win.x0};
  frame.y = {pat.win.y0, pat.win.y0, pat.win.y1, pat.win.y1, pat.win.y0};
  frame.color = "#999999";
  frame.stroke_width = 1.0;
  spec.series.push_back(frame);
  perfsim::io::plot_series pts;
  pts.points_only = true;
  pts.color = "#1f77b4";
  for (const auto& q : pat.points) {
    pts.x.push_back(q.x);
    pts.y.push_back(q.y);
  }
  spec.series.push_back(pts);
  perfsim::io::write_plot_svg(path, spec);
}

// ---------------------------------------------------------------------------
// simulate

struct simulate_args {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<std::string> out;
  std::optional<int> workers;
  bool svg = false;
};

int cmd_simulate(const simulate_args& args) {
  auto cfg = perfsim::io::config::load(args.config_path);
  std::set<std::string> allowed = spatial_model_keys;
  for (const char* k : {"seed", "replicates", "out", "block_length", "max_doublings", "svg",
                        "workers"})
    allowed.insert(k);
  cfg.require_known(allowed);

  if (args.seed) cfg.set("seed", *args.seed);
  if (args.replicates) cfg.set("replicates", *args.replicates);
  if (args.out) cfg.set("out", *args.out);
  if (args.workers) cfg.set("workers", *args.workers);
  if (args.svg) cfg.set("svg", 1);

  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const int replicates = static_cast<int>(cfg.get_int("replicates", 1));
  if (replicates < 1) throw input_error("replicates must be positive");
  const std::string out = cfg.get_string("out", "simulate_out");
  const bool svg = cfg.get_int("svg", 0) != 0;
  const int workers = static_cast<int>(cfg.get_int("workers", 0));

  cftp_options opts;
  opts.block_length = cfg.get_double("block_length", 2.0);
  opts.max_doublings = static_cast<int>(cfg.get_int("max_doublings", 30));

  const auto params = spatial_params_from_config(cfg);
  const perfsim::spatial::multiscale_model model(params);
  const auto sampler = model.sampler();

  ensure_out_dir(out);

  struct replicate_result {
    perfsim::spatial::pattern pat;
    run_stats stats;
    std::string error;
  };
  std::vector<replicate_result> results(static_cast<std::size_t>(replicates));
  perfsim::parallel_for(results.size(), perfsim::resolve_workers(workers), [&](std::size_t k) {
    cftp_options o = opts;
    o.seed = mix_seed(seed, k + 1);
    try {
      auto res = run_cftp(model, sampler, o);
      results[k].pat = perfsim::spatial::multiscale_model::extract(res.state, params.win);
      results[k].stats = res.stats;
    } catch (const perfsim::non_coalescence_error& e) {
      results[k].stats.coalesced = false;
      results[k].stats.final_horizon = e.horizon;
      results[k].error = e.what();
    }
  });

  // Single writer for all artifacts.
  bool any_failed = false;
  {
    auto meta = perfsim::io::open_output(join_path(out, "metadata.csv"));
    meta << "replicate,seed,coalesced,points,initial_points,final_horizon,doublings,"
            "birth_events,death_events,factor_evaluations,error\n";
    for (std::size_t k = 0; k < results.size(); ++k) {
      const auto& r = results[k];
      meta << k << ',' << mix_seed(seed, k + 1) << ',' << (r.error.empty() ? 1 : 0) << ','
           << (r.error.empty() ? static_cast<std::int64_t>(r.pat.size()) : -1) << ','
           << r.stats.initial_points << ',' << perfsim::io::format_double(r.stats.final_horizon)
           << ',' << r.stats.doublings_used << ',' << r.stats.birth_events << ','
           << r.stats.death_events << ',' << r.stats.factor_evaluations << ','
           << sanitize_csv_field(r.error) << '\n';
    }
  }
  char name[64];
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k].error.empty()) {
      any_failed = true;
      std::cerr << "replicate " << k << ": " << results[k].error << "\n";
      continue;
    }
    std::snprintf(name, sizeof(name), "pattern_%03zu.csv", k);
    perfsim::io::write_pattern_csv(join_path(out, name), results[k].pat.points);
    if (svg) {
      std::snprintf(name, sizeof(name), "pattern_%03zu.svg", k);
      write_pattern_svg(join_path(out, name), results[k].pat,
                        "exact draw " + std::to_string(k));
    }
    std::cout << "replicate " << k << ": " << results[k].pat.size() << " points, horizon "
              << results[k].stats.final_horizon << ", doublings "
              << results[k].stats.doublings_used << "\n";
  }

  perfsim::io::config echo;
  echo.set("command", "simulate");
  for (const auto& key : cfg.keys()) echo.set(key, cfg.get_string(key, ""));
  echo.set("seed", seed);
  echo.set("replicates", replicates);
  echo.set("out", out);
  add_spatial_echo(echo, model);
  echo.write_echo(join_path(out, "config_echo.cfg"));

  if (any_failed) {
    std::cerr << "one or more replicates failed to coalesce\n";
    return static_cast<int>(perfsim::exit_code::non_coalescence);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// envelope

struct envelope_args {
  std::string data_path;
  std::string config_path;
  std::optional<int> sims;
  std::optional<std::string> stat;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
};

std::vector<double> l_curve_or_degenerate(const perfsim::spatial::pattern& pat,
                                          const std::vector<double>& grid) {
  if (pat.size() < 2) return std::vector<double>(grid.size(), 0.0);
  return perfsim::stats::estimate_L(pat, grid).value;
}

std::vector<double> t_curve_or_degenerate(const perfsim::spatial::pattern& pat,
                                          const std::vector<double>& grid,
                                          const perfsim::stats::t_calibration& cal) {
  perfsim::stats::summary_function raw;
  raw.r = grid;
  raw.kind = perfsim::stats::summary_kind::T_raw;
  raw.value.assign(grid.size(), 0.0);
  if (pat.size() >= 3) raw = perfsim::stats::estimate_T(pat, grid);
  return perfsim::stats::transform_T(raw, cal).value;
}

void write_envelope_plot(const std::string& path, const std::vector<double>& grid,
                         const perfsim::stats::envelope_curves& env,
                         const std::vector<double>& data_curve,
                         const std::vector<double>& reference, const std::string& title,
                         const std::string& y_label) {
  perfsim::io::plot_spec spec;
  spec.title = title;
  spec.x_label = "r";
  spec.y_label = y_label;
  perfsim::io::plot_series lo{"envelope min", grid, env.lo, "#bbbbbb", 1.0, "", false, 2.2};
  perfsim::io::plot_series hi{"envelope max", grid, env.hi, "#bbbbbb", 1.0, "", false, 2.2};
  perfsim::io::plot_series mean{"envelope mean", grid, env.mean, "#1f77b4", 1.5, "6,4", false,
                                2.2};
  perfsim::io::plot_series data{"data", grid, data_curve, "#d62728", 2.0, "", false, 2.2};
  perfsim::io::plot_series ref{"reference", grid, reference, "#7f7f7f", 1.0, "2,3", false, 2.2};
  spec.series = {lo, hi, mean, ref, data};
  perfsim::io::write_plot_svg(path, spec);
}

int cmd_envelope(const envelope_args& args) {
  auto cfg = perfsim::io::config::load(args.config_path);
  std::set<std::string> allowed = spatial_model_keys;
  for (const char* k : {"seed", "out", "workers", "sims", "stat", "r_grid_n", "r_max",
                        "calibration_sims", "block_length", "max_doublings"})
    allowed.insert(k);
  cfg.require_known(allowed);

  if (args.seed) cfg.set("seed", *args.seed);
  if (args.sims) cfg.set("sims", *args.sims);
  if (args.stat) cfg.set("stat", *args.stat);
  if (args.out) cfg.set("out", *args.out);
  if (args.workers) cfg.set("workers", *args.workers);

  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const int sims = static_cast<int>(cfg.get_int("sims", 19));
  if (sims < 2) throw input_error("sims must be at least 2");
  const std::string stat = cfg.get_string("stat", "both");
  if (stat != "L" && stat != "T" && stat != "both")
    throw input_error("stat must be L, T or both");
  const std::string out = cfg.get_string("out", "envelope_out");
  const int workers = static_cast<int>(cfg.get_int("workers", 0));

  cftp_options opts;
  opts.block_length = cfg.get_double("block_length", 2.0);
  opts.max_doublings = static_cast<int>(cfg.get_int("max_doublings", 30));

  const auto params = spatial_params_from_config(cfg);
  const perfsim::spatial::multiscale_model model(params);
  const auto sampler = model.sampler();

  perfsim::spatial::pattern data;
  data.win = params.win;
  data.points = perfsim::io::read_pattern_csv(args.data_path);
  for (const auto& q : data.points)
    if (!params.win.contains(q))
      throw input_error("data point (" + perfsim::io::format_double(q.x) + ", " +
                        perfsim::io::format_double(q.y) + ") lies outside the window");

  const std::size_t grid_n = static_cast<std::size_t>(cfg.get_int("r_grid_n", 256));
  const double r_max = cfg.get_double("r_max", params.win.shorter_side() / 4.0);
  if (grid_n < 2 || !(r_max > 0.0)) throw input_error("invalid distance grid");
  std::vector<double> grid(grid_n);
  for (std::size_t i = 0; i < grid_n; ++i)
    grid[i] = r_max * static_cast<double>(i + 1) / static_cast<double>(grid_n);

  const bool want_l = stat != "T";
  const bool want_t = stat != "L";
  if (data.size() < 2) throw input_error("data pattern needs at least 2 points");
  if (want_t && data.size() < 3)
    throw input_error("transformed-T envelope needs at least 3 data points");

  // Exact model draws shared by both statistics.
  std::vector<perfsim::spatial::pattern> draws(static_cast<std::size_t>(sims));
  std::vector<run_stats> draw_stats(draws.size());
  perfsim::parallel_for(draws.size(), perfsim::resolve_workers(workers), [&](std::size_t i) {
    cftp_options o = opts;
    o.seed = mix_seed(seed, 0x51A0000 + i);
    auto res = run_cftp(model, sampler, o);
    draws[i] = perfsim::spatial::multiscale_model::extract(res.state, params.win);
    draw_stats[i] = res.stats;
  });

  ensure_out_dir(out);

  perfsim::io::config echo;
  echo.set("command", "envelope");
  echo.set("data", args.data_path);
  for (const auto& key : cfg.keys()) echo.set(key, cfg.get_string(key, ""));
  echo.set("seed", seed);
  echo.set("sims", sims);
  echo.set("stat", stat);
  echo.set("out", out);
  echo.set("derived_data_points", static_cast<std::uint64_t>(data.size()));
  add_spatial_echo(echo, model);

  if (want_l) {
    const auto data_l = perfsim::stats::estimate_L(data, grid);
    const auto env = perfsim::stats::envelope(
        grid, draws.size(), [&](std::size_t i) { return l_curve_or_degenerate(draws[i], grid); },
        workers);
    perfsim::io::write_curve_csv(join_path(out, "data_L.csv"), grid, data_l.value);
    perfsim::io::write_envelope_csv(join_path(out, "envelope_L.csv"), grid, env.lo, env.mean,
                                    env.hi);
    write_envelope_plot(join_path(out, "envelope_L.svg"), grid, env, data_l.value, grid,
                        "L function: data vs " + std::to_string(sims) + " exact draws", "L(r)");
  }
  if (want_t) {
    const double intensity = static_cast<double>(data.size()) / params.win.area();
    const std::size_t cal_sims = static_cast<std::size_t>(cfg.get_int("calibration_sims", 500));
    const auto cal = perfsim::stats::calibrate_T(intensity, params.win, grid, cal_sims,
                                                 mix_seed(seed, 0xCA11B), workers);
    echo.set("derived_calibration_intensity", intensity);
    echo.set("derived_calibration_sims", static_cast<std::uint64_t>(cal_sims));
    const auto data_t = perfsim::stats::transform_T(perfsim::stats::estimate_T(data, grid), cal);
    const auto env = perfsim::stats::envelope(
        grid, draws.size(),
        [&](std::size_t i) { return t_curve_or_degenerate(draws[i], grid, cal); }, workers);
    perfsim::io::write_curve_csv(join_path(out, "calibration_T.csv"), grid, cal.c);
    perfsim::io::write_curve_csv(join_path(out, "data_T.csv"), grid, data_t.value);
    perfsim::io::write_envelope_csv(join_path(out, "envelope_T.csv"), grid, env.lo, env.mean,
                                    env.hi);
    write_envelope_plot(join_path(out, "envelope_T.svg"), grid, env, data_t.value,
                        std::vector<double>(grid.size(), 0.0),
                        "transformed T: data vs " + std::to_string(sims) + " exact draws",
                        "(c T)^(1/4) - r");
  }

  echo.write_echo(join_path(out, "config_echo.cfg"));
  double mean_doublings = 0.0;
  for (const auto& st : draw_stats) mean_doublings += st.doublings_used;
  mean_doublings /= static_cast<double>(draw_stats.size());
  std::cout << "envelope over " << sims << " exact draws written to " << out
            << " (mean doublings " << mean_doublings << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// denoise

struct denoise_args {
  std::string signal_path;
  double sigma = 0.0;
  double tau = 1.0;
  double lambda = 0.05;
  double gamma = 3.0;
  int draws = 25;
  std::string wavelet = "la10";
  std::uint64_t seed = 1;
  std::string out = "denoise_out";
  int workers = 0;
  double tier_c_log = 20.0;
  std::string truth_path;
  bool svg = false;
};

int cmd_denoise(const denoise_args& args) {
  if (!(args.sigma > 0.0)) throw input_error("sigma must be positive");
  const auto y = perfsim::io::read_signal_csv(args.signal_path);

  perfsim::wavelet::lattice_hyper hyper;
  hyper.sigma = args.sigma;
  hyper.tau = args.tau;
  hyper.lambda = args.lambda;
  hyper.gamma = args.gamma;
  hyper.tier_c_log_threshold = args.tier_c_log;

  perfsim::wavelet::denoise_options opts;
  opts.wavelet = perfsim::wavelet::family_from_name(args.wavelet);
  opts.seed = args.seed;
  opts.workers = args.workers;

  const auto res = perfsim::wavelet::denoise(y, hyper, args.draws, opts);

  ensure_out_dir(args.out);
  perfsim::io::write_signal_csv(join_path(args.out, "estimate.csv"), res.estimate);

  {
    auto diag = perfsim::io::open_output(join_path(args.out, "diagnostics.csv"));
    diag << "draw,coalesced,doublings,final_horizon,initial_points,birth_events,death_events,"
            "factor_evaluations\n";
    for (std::size_t t = 0; t < res.runs.size(); ++t) {
      const auto& st = res.runs[t];
      diag << t << ',' << (st.coalesced ? 1 : 0) << ',' << st.doublings_used << ','
           << perfsim::io::format_double(st.final_horizon) << ',' << st.initial_points << ','
           << st.birth_events << ',' << st.death_events << ',' << st.factor_evaluations << '\n';
    }
  }

  std::vector<double> truth;
  if (!args.truth_path.empty()) {
    truth = perfsim::io::read_signal_csv(args.truth_path);
    if (truth.size() != y.size())
      throw input_error("truth signal length differs from input signal length");
  }

  if (args.svg) {
    perfsim::io::plot_spec spec;
    spec.title = "denoised estimate";
    spec.x_label = "t";
    spec.y_label = "value";
    const auto t_of = [&](std::size_t i) {
      return static_cast<double>(i + 1) / static_cast<double>(y.size());
    };
    perfsim::io::plot_series noisy;
    noisy.name = "noisy";
    noisy.points_only = true;
    noisy.color = "#bbbbbb";
    noisy.point_radius = 1.6;
    for (std::size_t i = 0; i < y.size(); ++i) {
      noisy.x.push_back(t_of(i));
      noisy.y.push_back(y[i]);
    }
    spec.series.push_back(noisy);
    if (!truth.empty()) {
      perfsim::io::plot_series tr;
      tr.name = "truth";
      tr.color = "#1f77b4";
      tr.dash = "6,4";
      for (std::size_t i = 0; i < truth.size(); ++i) {
        tr.x.push_back(t_of(i));
        tr.y.push_back(truth[i]);
      }
      spec.series.push_back(tr);
    }
    perfsim::io::plot_series est;
    est.name = "estimate";
    est.color = "#d62728";
    est.stroke_width = 2.0;
    for (std::size_t i = 0; i < res.estimate.size(); ++i) {
      est.x.push_back(t_of(i));
      est.y.push_back(res.estimate[i]);
    }
    spec.series.push_back(est);
    perfsim::io::write_plot_svg(join_path(args.out, "estimate.svg"), spec);
  }

  perfsim::io::config echo;
  echo.set("command", "denoise");
  echo.set("signal", args.signal_path);
  echo.set("sigma", args.sigma);
  echo.set("tau", args.tau);
  echo.set("lambda", args.lambda);
  echo.set("gamma", args.gamma);
  echo.set("draws", args.draws);
  echo.set("wavelet", args.wavelet);
  echo.set("seed", args.seed);
  echo.set("tier_c_log_threshold", args.tier_c_log);
  echo.set("out", args.out);
  if (!args.truth_path.empty()) echo.set("truth", args.truth_path);
  echo.set("derived_n", static_cast<std::uint64_t>(y.size()));
  echo.set("derived_sites",
           static_cast<std::uint64_t>(res.simulated_sites + res.surrogate_sites +
                                      res.direct_sites));
  echo.set("derived_simulated_sites", static_cast<std::uint64_t>(res.simulated_sites));
  echo.set("derived_surrogate_sites", static_cast<std::uint64_t>(res.surrogate_sites));
  echo.set("derived_direct_sites", static_cast<std::uint64_t>(res.direct_sites));
  echo.write_echo(join_path(args.out, "config_echo.cfg"));

  if (!truth.empty()) {
    double mse = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      mse += (res.estimate[i] - truth[i]) * (res.estimate[i] - truth[i]);
    mse /= static_cast<double>(truth.size());
    std::cout << "mse vs truth: " << mse << "\n";
  }
  double mean_doublings = 0.0;
  for (const auto& st : res.runs) mean_doublings += st.doublings_used;
  if (!res.runs.empty()) mean_doublings /= static_cast<double>(res.runs.size());
  std::cout << "denoised " << y.size() << " samples: " << res.simulated_sites
            << " simulated sites, " << res.surrogate_sites << " surrogate, " << res.direct_sites
            << " direct; " << args.draws << " draws, mean doublings " << mean_doublings << "\n";
  std::cout << "artifacts written to " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// study

struct study_args {
  std::string config_path;
  std::string cells_spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
};

std::vector<std::pair<std::string, double>> parse_cells_spec(
    const std::string& spec, const std::vector<std::string>& functions,
    const std::vector<double>& rsnr) {
  std::vector<std::pair<std::string, double>> cells;
  auto match_rsnr = [&](double v) -> std::optional<double> {
    for (double r : rsnr)
      if (std::abs(r - v) < 1e-9) return r;
    return std::nullopt;
  };
  for (const auto& raw : perfsim::io::detail::split_fields(spec)) {
    const std::string token = perfsim::io::detail::trim(raw);
    if (token.empty()) continue;
    const std::size_t colon = token.find(':');
    const std::string fn = colon == std::string::npos ? token : token.substr(0, colon);
    std::optional<double> want_r;
    if (colon != std::string::npos && colon + 1 < token.size()) {
      double v = 0.0;
      if (!perfsim::io::detail::parse_double(token.substr(colon + 1), v))
        throw input_error("bad rsnr in cells token '" + token + "'");
      want_r = match_rsnr(v);
      if (!want_r) throw input_error("rsnr in token '" + token + "' is not in the study grid");
    }
    if (!fn.empty() &&
        std::find(functions.begin(), functions.end(), fn) == functions.end())
      throw input_error("function in token '" + token + "' is not in the study grid");
    for (const auto& f : functions) {
      if (!fn.empty() && f != fn) continue;
      for (double r : rsnr) {
        if (want_r && std::abs(*want_r - r) >= 1e-9) continue;
        if (std::find(cells.begin(), cells.end(), std::make_pair(f, r)) == cells.end())
          cells.emplace_back(f, r);
      }
    }
  }
  if (cells.empty()) throw input_error("cells spec selects no cells");
  return cells;
}

std::string format_amse(double amse, double se) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f (%.1f)", amse, se);
  return std::string(buf);
}

int cmd_study(const study_args& args) {
  auto cfg_file = perfsim::io::config::load(args.config_path);
  cfg_file.require_known({"n", "functions", "rsnr", "replicates", "draws", "tau", "lambda",
                          "gamma", "seed", "workers", "out", "tier_c_log_threshold"});

  perfsim::wavelet::study_config cfg;
  cfg.n = static_cast<std::size_t>(cfg_file.get_int("n", 256));
  cfg.functions = cfg_file.get_list("functions", cfg.functions);
  if (cfg_file.has("rsnr")) {
    cfg.rsnr.clear();
    for (const auto& tok : cfg_file.get_list("rsnr", {})) {
      double v = 0.0;
      if (!perfsim::io::detail::parse_double(tok, v))
        throw input_error("rsnr list entry is not numeric: " + tok);
      cfg.rsnr.push_back(v);
    }
  }
  cfg.replicates = static_cast<int>(cfg_file.get_int("replicates", 25));
  cfg.draws = static_cast<int>(cfg_file.get_int("draws", 25));
  cfg.tau = cfg_file.get_double("tau", 1.0);
  cfg.lambda = cfg_file.get_double("lambda", 0.05);
  cfg.gamma = cfg_file.get_double("gamma", 3.0);
  cfg.seed = cfg_file.get_u64("seed", 1);
  cfg.workers = static_cast<int>(cfg_file.get_int("workers", 0));
  cfg.tier_c_log_threshold = cfg_file.get_double("tier_c_log_threshold", 20.0);
  if (args.seed) cfg.seed = *args.seed;
  if (args.workers) cfg.workers = *args.workers;
  if (!args.cells_spec.empty())
    cfg.cells = parse_cells_spec(args.cells_spec, cfg.functions, cfg.rsnr);
  const std::string out = args.out ? *args.out : cfg_file.get_string("out", "study_out");

  const auto results = perfsim::wavelet::run_study(cfg);

  ensure_out_dir(out);

  // Long-form numeric results.
  {
    auto raw = perfsim::io::open_output(join_path(out, "study_cells.csv"));
    raw << "function,rsnr,replicates,amse,se,amse_universal,se_universal,mean_doublings,"
           "mean_events\n";
    for (const auto& r : results)
      raw << r.function << ',' << perfsim::io::format_double(r.rsnr) << ',' << r.replicates
          << ',' << perfsim::io::format_double(r.amse) << ',' << perfsim::io::format_double(r.se)
          << ',' << perfsim::io::format_double(r.amse_universal) << ','
          << perfsim::io::format_double(r.se_universal) << ','
          << perfsim::io::format_double(r.mean_doublings) << ','
          << perfsim::io::format_double(r.mean_events) << '\n';
  }

  // Wide table: rows rsnr x method, columns functions.
  auto find_cell = [&](const std::string& fn, double r) -> const
      perfsim::wavelet::study_cell_result* {
        for (const auto& c : results)
          if (c.function == fn && std::abs(c.rsnr - r) < 1e-9) return &c;
        return nullptr;
      };
  std::vector<double> rsnr_rows;
  for (const auto& c : results)
    if (std::find_if(rsnr_rows.begin(), rsnr_rows.end(), [&](double v) {
          return std::abs(v - c.rsnr) < 1e-9;
        }) == rsnr_rows.end())
      rsnr_rows.push_back(c.rsnr);

  const std::vector<std::pair<std::string, bool>> methods = {
      {"posterior-median", false}, {"universal-threshold", true}};
  {
    auto wide = perfsim::io::open_output(join_path(out, "study.csv"));
    wide << "rsnr,method";
    for (const auto& fn : cfg.functions) wide << ',' << fn;
    wide << '\n';
    for (double r : rsnr_rows)
      for (const auto& [method, universal] : methods) {
        wide << perfsim::io::format_double(r) << ',' << method;
        for (const auto& fn : cfg.functions) {
          const auto* c = find_cell(fn, r);
          if (c == nullptr)
            wide << ",-";
          else
            wide << ',' << (universal ? format_amse(c->amse_universal, c->se_universal)
                                      : format_amse(c->amse, c->se));
        }
        wide << '\n';
      }
  }

  // Human-readable table, also echoed to stdout.
  std::string text;
  {
    char line[512];
    std::snprintf(line, sizeof(line),
                  "AMSE x 1e4 (s.e.), n=%zu, replicates=%d, draws=%d, tau=%g, lambda=%g, "
                  "gamma=%g\n\n",
                  cfg.n, cfg.replicates, cfg.draws, cfg.tau, cfg.lambda, cfg.gamma);
    text += line;
    std::snprintf(line, sizeof(line), "%-6s %-22s", "rsnr", "method");
    text += line;
    for (const auto& fn : cfg.functions) {
      std::snprintf(line, sizeof(line), " %-15s", fn.c_str());
      text += line;
    }
    text += '\n';
    for (double r : rsnr_rows)
      for (const auto& [method, universal] : methods) {
        std::snprintf(line, sizeof(line), "%-6g %-22s", r, method.c_str());
        text += line;
        for (const auto& fn : cfg.functions) {
          const auto* c = find_cell(fn, r);
          const std::string cell =
              c == nullptr ? "-"
                           : (universal ? format_amse(c->amse_universal, c->se_universal)
                                        : format_amse(c->amse, c->se));
          std::snprintf(line, sizeof(line), " %-15s", cell.c_str());
          text += line;
        }
        text += '\n';
      }
  }
  {
    auto txt = perfsim::io::open_output(join_path(out, "study.txt"));
    txt << text;
  }
  std::cout << text;

  perfsim::io::config echo;
  echo.set("command", "study");
  echo.set("n", static_cast<std::uint64_t>(cfg.n));
  {
    std::string fns;
    for (const auto& f : cfg.functions) fns += (fns.empty() ? "" : ",") + f;
    echo.set("functions", fns);
    std::string rs;
    for (double r : cfg.rsnr) rs += (rs.empty() ? "" : ",") + perfsim::io::format_double(r);
    echo.set("rsnr", rs);
    if (!cfg.cells.empty()) {
      std::string cs;
      for (const auto& [f, r] : cfg.cells)
        cs += (cs.empty() ? "" : ",") + f + ":" + perfsim::io::format_double(r);
      echo.set("cells", cs);
    }
  }
  echo.set("replicates", cfg.replicates);
  echo.set("draws", cfg.draws);
  echo.set("tau", cfg.tau);
  echo.set("lambda", cfg.lambda);
  echo.set("gamma", cfg.gamma);
  echo.set("seed", cfg.seed);
  echo.set("tier_c_log_threshold", cfg.tier_c_log_threshold);
  echo.set("out", out);
  echo.write_echo(join_path(out, "config_echo.cfg"));
  return 0;
}

// ---------------------------------------------------------------------------
// selftest: quick oracle-equivalence and invariant checks

perfsim::spatial::multiscale_model selftest_spatial_model() {
  perfsim::spatial::multiscale_params p;
  p.lambda = 0.8;
  p.win = {0.0, 0.0, 1.0, 1.0};
  p.terms = {{0.3, 0.12}, {-0.7, 0.08}};
  p.grid_h = 0.01;
  return perfsim::spatial::multiscale_model(p);
}

perfsim::wavelet::lattice_model selftest_lattice_model() {
  perfsim::wavelet::lattice_hyper hyper;
  hyper.sigma = 1.0;
  hyper.tau = 1.0;
  hyper.lambda = 0.05;
  hyper.gamma = 2.0;
  return perfsim::wavelet::lattice_model({0.3, -0.2, 0.5, 0.1, -0.4, 0.25, -0.15}, hyper, 3);
}

double tv_distance(const std::map<std::string, std::uint64_t>& a, std::uint64_t na,
                   const std::map<std::string, std::uint64_t>& b, std::uint64_t nb) {
  double tv = 0.0;
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  for (const auto& k : keys) {
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    const double pa = ia == a.end() ? 0.0 : static_cast<double>(ia->second) / na;
    const double pb = ib == b.end() ? 0.0 : static_cast<double>(ib->second) / nb;
    tv += std::abs(pa - pb);
  }
  return tv / 2.0;
}

int cmd_selftest(int workers) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!ok && !detail.empty()) std::cout << ": " << detail;
    std::cout << "\n";
    if (!ok) ++failures;
  };

  // 1. Wavelet transform round-trip.
  {
    double worst = 0.0;
    rng r(2024, 7);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> x(256);
      for (auto& v : x) v = r.normal();
      for (auto f : {perfsim::wavelet::family::haar, perfsim::wavelet::family::la10}) {
        const auto back = perfsim::wavelet::idwt(perfsim::wavelet::dwt(x, f), f);
        for (std::size_t i = 0; i < x.size(); ++i)
          worst = std::max(worst, std::abs(back[i] - x[i]));
      }
    }
    report("wavelet round-trip", worst < 1e-10, "max error " + std::to_string(worst));
  }

  // 2. Trajectory reuse: a longer horizon extends the event stream without
  // rewriting the part already generated.
  {
    const auto model = selftest_spatial_model();
    const auto sampler = model.sampler();
    perfsim::trajectory<perfsim::uniform_window_sampler> t1(sampler, 2.0, 99);
    perfsim::trajectory<perfsim::uniform_window_sampler> t2(sampler, 2.0, 99);
    t1.ensure_horizon(8.0);
    t2.ensure_horizon(2.0);
    t2.ensure_horizon(8.0);
    const auto e1 = t1.events_for_horizon(8.0);
    const auto e2 = t2.events_for_horizon(8.0);
    bool ok = e1.size() == e2.size();
    if (ok)
      for (std::size_t i = 0; i < e1.size(); ++i)
        ok = ok && e1[i]->id == e2[i]->id && e1[i]->birth == e2[i]->birth &&
             e1[i]->death == e2[i]->death && e1[i]->mark == e2[i]->mark;
    report("trajectory reuse", ok);
  }

  // 3. Spatial coupling vs rejection oracle (count distribution).
  {
    const auto model = selftest_spatial_model();
    const auto sampler = model.sampler();
    std::map<std::string, std::uint64_t> h_cftp, h_oracle;
    const std::size_t n_cftp = 4000, n_oracle = 30000;
    for (std::size_t i = 0; i < n_cftp; ++i) {
      cftp_options o;
      o.seed = mix_seed(501, i);
      const auto res = run_cftp(model, sampler, o);
      ++h_cftp[std::to_string(res.state.points.size())];
    }
    perfsim::oracle::spatial_oracle oracle(model);
    rng r(502, 0);
    for (std::size_t i = 0; i < n_oracle; ++i)
      ++h_oracle[std::to_string(oracle.draw(r).size())];
    const double tv = tv_distance(h_cftp, n_cftp, h_oracle, n_oracle);
    report("spatial coupling vs rejection oracle", tv < 0.06,
           "TV distance " + std::to_string(tv));
  }

  // 4. Lattice coupling vs rejection oracle (joint count vectors).
  {
    const auto model = selftest_lattice_model();
    const auto sampler = model.sampler();
    std::map<std::string, std::uint64_t> h_cftp, h_oracle;
    auto key_of = [](const std::vector<std::uint32_t>& xi) {
      std::string k;
      for (auto v : xi) k += std::to_string(v) + ",";
      return k;
    };
    const std::size_t n_cftp = 4000, n_oracle = 30000;
    for (std::size_t i = 0; i < n_cftp; ++i) {
      cftp_options o;
      o.seed = mix_seed(601, i);
      const auto res = run_cftp(model, sampler, o);
      ++h_cftp[key_of(res.state.xi)];
    }
    perfsim::oracle::lattice_oracle oracle(model);
    rng r(602, 0);
    for (std::size_t i = 0; i < n_oracle; ++i) ++h_oracle[key_of(oracle.draw(r))];
    const double tv = tv_distance(h_cftp, n_cftp, h_oracle, n_oracle);
    report("lattice coupling vs rejection oracle", tv < 0.06,
           "TV distance " + std::to_string(tv));
  }

  // 5. Coupling invariants under instrumentation, plus the evaluation-count
  // contract: exactly two ratio evaluations per factor per birth event.
  {
    std::size_t violations = 0;
    bool eval_ok = true;
    const auto smodel = selftest_spatial_model();
    const auto ssampler = smodel.sampler();
    for (std::size_t i = 0; i < 20; ++i) {
      perfsim::invariant_observer<perfsim::spatial::multiscale_model> obs;
      cftp_options o;
      o.seed = mix_seed(701, i);
      const auto res = run_cftp(smodel, ssampler, o, obs);
      obs.finalize();
      violations += obs.violations.size();
      eval_ok = eval_ok && res.stats.factor_evaluations ==
                               2 * static_cast<std::uint64_t>(smodel.factor_count()) *
                                   res.stats.birth_events;
    }
    const auto lmodel = selftest_lattice_model();
    const auto lsampler = lmodel.sampler();
    for (std::size_t i = 0; i < 20; ++i) {
      perfsim::invariant_observer<perfsim::wavelet::lattice_model> obs;
      cftp_options o;
      o.seed = mix_seed(702, i);
      const auto res = run_cftp(lmodel, lsampler, o, obs);
      obs.finalize();
      violations += obs.violations.size();
      eval_ok = eval_ok && res.stats.factor_evaluations ==
                               2 * static_cast<std::uint64_t>(lmodel.factor_count()) *
                                   res.stats.birth_events;
    }
    report("coupling invariants", violations == 0 && eval_ok,
           std::to_string(violations) + " violations");
  }

  // 6. Determinism: identical seeds give identical results.
  {
    const auto model = selftest_spatial_model();
    const auto sampler = model.sampler();
    cftp_options o;
    o.seed = 321;
    const auto a = run_cftp(model, sampler, o);
    const auto b = run_cftp(model, sampler, o);
    bool ok = a.state.points.size() == b.state.points.size();
    const auto pa = perfsim::spatial::multiscale_model::extract(a.state, model.params().win);
    const auto pb = perfsim::spatial::multiscale_model::extract(b.state, model.params().win);
    if (ok)
      for (std::size_t i = 0; i < pa.size(); ++i)
        ok = ok && pa.points[i].x == pb.points[i].x && pa.points[i].y == pb.points[i].y;

    const auto truth = perfsim::wavelet::make_test_signal("heavisine", 64);
    std::vector<double> noisy(truth.size());
    rng nr(17, 3);
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] = truth[i] + 0.33 * nr.normal();
    perfsim::wavelet::lattice_hyper hyper;
    hyper.sigma = 0.33;
    perfsim::wavelet::denoise_options dopts;
    dopts.seed = 9;
    dopts.workers = workers;
    const auto d1 = perfsim::wavelet::denoise(noisy, hyper, 5, dopts);
    const auto d2 = perfsim::wavelet::denoise(noisy, hyper, 5, dopts);
    for (std::size_t i = 0; ok && i < d1.estimate.size(); ++i)
      ok = d1.estimate[i] == d2.estimate[i];
    report("determinism", ok);
  }

  if (failures == 0) {
    std::cout << "all selftests passed\n";
    return 0;
  }
  std::cerr << failures << " selftest(s) failed\n";
  return static_cast<int>(perfsim::exit_code::internal_error);
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"exact sampling toolkit: spatial point processes and wavelet denoising"};
  app.require_subcommand(1);

  simulate_args sim;
  auto* sim_cmd = app.add_subcommand("simulate", "draw exact samples of a spatial model");
  sim_cmd->add_option("--config", sim.config_path, "model config file")
      ->required()
      ->check(CLI::ExistingFile);
  std::uint64_t sim_seed = 0;
  int sim_reps = 0, sim_workers = 0;
  std::string sim_out;
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "seed override");
  auto* sim_reps_opt = sim_cmd->add_option("--replicates", sim_reps, "replicate count override");
  auto* sim_out_opt = sim_cmd->add_option("--out", sim_out, "output directory");
  auto* sim_workers_opt = sim_cmd->add_option("--workers", sim_workers, "worker thread count");
  sim_cmd->add_flag("--svg", sim.svg, "also write scatter plots");

  envelope_args env;
  auto* env_cmd = app.add_subcommand("envelope", "summary-statistic envelopes from exact draws");
  env_cmd->add_option("--data", env.data_path, "observed pattern CSV")
      ->required()
      ->check(CLI::ExistingFile);
  env_cmd->add_option("--config", env.config_path, "model config file")
      ->required()
      ->check(CLI::ExistingFile);
  int env_sims = 0, env_workers = 0;
  std::uint64_t env_seed = 0;
  std::string env_stat, env_out;
  auto* env_sims_opt = env_cmd->add_option("--sims", env_sims, "number of simulations (19)");
  auto* env_stat_opt = env_cmd->add_option("--stat", env_stat, "statistic: L, T or both");
  auto* env_seed_opt = env_cmd->add_option("--seed", env_seed, "seed override");
  auto* env_out_opt = env_cmd->add_option("--out", env_out, "output directory");
  auto* env_workers_opt = env_cmd->add_option("--workers", env_workers, "worker thread count");

  denoise_args den;
  auto* den_cmd = app.add_subcommand("denoise", "Bayesian wavelet denoising by exact sampling");
  den_cmd->add_option("--signal", den.signal_path, "single-column signal CSV")
      ->required()
      ->check(CLI::ExistingFile);
  den_cmd->add_option("--sigma", den.sigma, "noise standard deviation")->required();
  den_cmd->add_option("--tau", den.tau, "prior coefficient scale (1.0)");
  den_cmd->add_option("--lambda", den.lambda, "prior intensity per site (0.05)");
  den_cmd->add_option("--gamma", den.gamma, "neighbourhood penalty (3.0)");
  den_cmd->add_option("--draws", den.draws, "posterior draws for the median (25)");
  den_cmd->add_option("--wavelet", den.wavelet, "haar or la10 (la10)");
  den_cmd->add_option("--seed", den.seed, "seed (1)");
  den_cmd->add_option("--out", den.out, "output directory (denoise_out)");
  den_cmd->add_option("--workers", den.workers, "worker thread count");
  den_cmd->add_option("--tier-c-log", den.tier_c_log,
                      "log rate threshold for direct coefficient draws (20)");
  den_cmd->add_option("--truth", den.truth_path, "optional truth signal CSV")
      ->check(CLI::ExistingFile);
  den_cmd->add_flag("--svg", den.svg, "also write an overlay plot");

  study_args stu;
  auto* stu_cmd = app.add_subcommand("study", "replicated denoising experiment");
  stu_cmd->add_option("--config", stu.config_path, "study config file")
      ->required()
      ->check(CLI::ExistingFile);
  stu_cmd->add_option("--cells", stu.cells_spec,
                      "cell subset, e.g. blocks:10,bumps:7 or heavisine or :10");
  std::uint64_t stu_seed = 0;
  int stu_workers = 0;
  std::string stu_out;
  auto* stu_seed_opt = stu_cmd->add_option("--seed", stu_seed, "seed override");
  auto* stu_out_opt = stu_cmd->add_option("--out", stu_out, "output directory");
  auto* stu_workers_opt = stu_cmd->add_option("--workers", stu_workers, "worker thread count");

  int self_workers = 0;
  auto* self_cmd = app.add_subcommand("selftest", "run the oracle-equivalence checks");
  self_cmd->add_option("--workers", self_workers, "worker thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(perfsim::exit_code::input_error);
  }

  try {
    if (sim_cmd->parsed()) {
      if (sim_seed_opt->count()) sim.seed = sim_seed;
      if (sim_reps_opt->count()) sim.replicates = sim_reps;
      if (sim_out_opt->count()) sim.out = sim_out;
      if (sim_workers_opt->count()) sim.workers = sim_workers;
      return cmd_simulate(sim);
    }
    if (env_cmd->parsed()) {
      if (env_sims_opt->count()) env.sims = env_sims;
      if (env_stat_opt->count()) env.stat = env_stat;
      if (env_seed_opt->count()) env.seed = env_seed;
      if (env_out_opt->count()) env.out = env_out;
      if (env_workers_opt->count()) env.workers = env_workers;
      return cmd_envelope(env);
    }
    if (den_cmd->parsed()) return cmd_denoise(den);
    if (stu_cmd->parsed()) {
      if (stu_seed_opt->count()) stu.seed = stu_seed;
      if (stu_out_opt->count()) stu.out = stu_out;
      if (stu_workers_opt->count()) stu.workers = stu_workers;
      return cmd_study(stu);
    }
    if (self_cmd->parsed()) return cmd_selftest(self_workers);
  } catch (const perfsim::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(perfsim::exit_code::internal_error);
  }
  return 0;
}
