#ifndef PERFSIM_WAVELET_SIGNALS_HPP
#define PERFSIM_WAVELET_SIGNALS_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "perfsim/errors.hpp"

namespace perfsim::wavelet {

// The four standard piecewise test functions used in the denoising
// literature, sampled at t_i = i/n for i = 1..n and standardized to sample
// mean zero and population standard deviation one, so that a noise level
// sigma corresponds to a root signal-to-noise ratio of 1/sigma.

namespace detail {

inline double sgn(double x) { return x > 0.0 ? 1.0 : x < 0.0 ? -1.0 : 0.0; }

inline double blocks_at(double t) {
  static const double tj[] = {0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81};
  static const double hj[] = {4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};
  double v = 0.0;
  for (int j = 0; j < 11; ++j) v += hj[j] * (1.0 + sgn(t - tj[j])) / 2.0;
  return v;
}

inline double bumps_at(double t) {
  static const double tj[] = {0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81};
  static const double hj[] = {4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
  static const double wj[] = {0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005};
  double v = 0.0;
  for (int j = 0; j < 11; ++j) {
    const double u = (t - tj[j]) / wj[j];
    const double b = 1.0 + std::abs(u);
    v += hj[j] / (b * b * b * b);
  }
  return v;
}

inline double heavisine_at(double t) {
  return 4.0 * std::sin(4.0 * M_PI * t) - sgn(t - 0.3) - sgn(0.72 - t);
}

inline double doppler_at(double t) {
  return std::sqrt(t * (1.0 - t)) * std::sin(2.0 * M_PI * 1.05 / (t + 0.05));
}

}  // namespace detail

inline std::vector<std::string> test_signal_names() {
  return {"blocks", "bumps", "heavisine", "doppler"};
}

inline std::vector<double> make_test_signal(const std::string& name, std::size_t n) {
  if (n < 2) throw input_error("test signal length must be at least 2");
  double (*f)(double) = nullptr;
  if (name == "blocks") f = detail::blocks_at;
  else if (name == "bumps") f = detail::bumps_at;
  else if (name == "heavisine") f = detail::heavisine_at;
  else if (name == "doppler") f = detail::doppler_at;
  else throw input_error("unknown test signal '" + name + "'");

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = f(static_cast<double>(i + 1) / static_cast<double>(n));
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw internal_error("test signal is constant");
  for (double& v : x) v = (v - mean) / sd;
  return x;
}

}  // namespace perfsim::wavelet

#endif  // PERFSIM_WAVELET_SIGNALS_HPP
