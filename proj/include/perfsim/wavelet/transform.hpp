#ifndef PERFSIM_WAVELET_TRANSFORM_HPP
#define PERFSIM_WAVELET_TRANSFORM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "perfsim/errors.hpp"

namespace perfsim::wavelet {

enum class family { haar, la10 };

inline family family_from_name(const std::string& name) {
  if (name == "haar") return family::haar;
  if (name == "la10" || name == "sym10") return family::la10;
  throw input_error("unknown wavelet '" + name + "' (expected haar or la10)");
}

// Decomposition low-pass filters.  The LA-10 filter is Daubechies' least
// asymmetric order-10 (20-tap) scaling filter, computed by spectral
// factorization of the order-10 half-band polynomial in 60-digit arithmetic
// and rounded here; it satisfies sum h = sqrt(2), unit energy, even-shift
// orthogonality and 10 vanishing moments to double precision.
inline const std::vector<double>& scaling_filter(family f) {
  static const std::vector<double> haar_h = {0.7071067811865475244, 0.7071067811865475244};
  static const std::vector<double> la10_h = {
      -0.000459329421004652040, 0.0000570360836184950068, 0.00459317358531179195,
      -0.000804358932016451296, -0.0203549398123111107,   0.00576491203358114967,
      0.0499949720773751563,    -0.0319900568824281139,   -0.0355367404738195858,
      0.383826761067076326,     0.769510037021097937,     0.471690666938442910,
      -0.0708805357832315723,   -0.159494278884910609,    0.0116098939037113181,
      0.0459272392310915086,    -0.00146538258130461051,  -0.00864129927702215026,
      0.0000956326707228527308, 0.000770159809114459823};
  return f == family::haar ? haar_h : la10_h;
}

// Detail (high-pass) filter by the usual quadrature-mirror relation.
inline std::vector<double> detail_filter(const std::vector<double>& h) {
  const std::size_t L = h.size();
  std::vector<double> g(L);
  for (std::size_t k = 0; k < L; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[L - 1 - k];
  return g;
}

// Pyramid coefficients of a length-2^J signal: detail levels j = 0..J-1
// (level j holds 2^j coefficients; j = J-1 is the finest) plus the single
// scaling coefficient left at the top.
struct coefficient_tree {
  std::size_t n = 0;
  std::size_t levels = 0;  // J
  double scaling = 0.0;
  std::vector<std::vector<double>> detail;  // detail[j].size() == 2^j

  std::size_t detail_count() const { return n > 0 ? n - 1 : 0; }
};

inline std::size_t levels_for_length(std::size_t n) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw input_error("signal length must be a power of two and at least 2");
  std::size_t j = 0;
  while ((std::size_t{1} << j) < n) ++j;
  return j;
}

// Periodic orthonormal analysis step: one level of convolution-decimation.
inline void analysis_step(const std::vector<double>& x, const std::vector<double>& h,
                          const std::vector<double>& g, std::vector<double>& approx,
                          std::vector<double>& det) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  const std::size_t L = h.size();
  approx.assign(half, 0.0);
  det.assign(half, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    for (std::size_t k = 0; k < L; ++k) {
      const double v = x[(2 * i + k) % n];
      a += h[k] * v;
      d += g[k] * v;
    }
    approx[i] = a;
    det[i] = d;
  }
}

inline void synthesis_step(const std::vector<double>& approx, const std::vector<double>& det,
                           const std::vector<double>& h, const std::vector<double>& g,
                           std::vector<double>& x) {
  const std::size_t half = approx.size();
  const std::size_t n = half * 2;
  const std::size_t L = h.size();
  x.assign(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    for (std::size_t k = 0; k < L; ++k) {
      const std::size_t m = (2 * i + k) % n;
      x[m] += h[k] * approx[i] + g[k] * det[i];
    }
  }
}

inline coefficient_tree dwt(const std::vector<double>& signal, family f) {
  coefficient_tree tree;
  tree.n = signal.size();
  tree.levels = levels_for_length(tree.n);
  tree.detail.resize(tree.levels);
  const auto& h = scaling_filter(f);
  const auto g = detail_filter(h);
  std::vector<double> a = signal, next_a, d;
  for (std::size_t j = tree.levels; j-- > 0;) {
    analysis_step(a, h, g, next_a, d);
    tree.detail[j] = d;
    a.swap(next_a);
  }
  tree.scaling = a[0];
  return tree;
}

inline std::vector<double> idwt(const coefficient_tree& tree, family f) {
  const auto& h = scaling_filter(f);
  const auto g = detail_filter(h);
  std::vector<double> a = {tree.scaling}, next;
  for (std::size_t j = 0; j < tree.levels; ++j) {
    if (tree.detail[j].size() != (std::size_t{1} << j))
      throw input_error("coefficient tree has a malformed level");
    synthesis_step(a, tree.detail[j], h, g, next);
    a.swap(next);
  }
  return a;
}

// Flat indexing of detail coefficients: site = 2^j - 1 + k for level j,
// position k.  Used by the lattice prior, which lives on these indices.
inline std::size_t flat_index(std::size_t j, std::size_t k) {
  return (std::size_t{1} << j) - 1 + k;
}
inline std::size_t level_of_flat(std::size_t s) {
  std::size_t j = 0;
  while ((std::size_t{2} << j) - 1 <= s) ++j;
  return j;
}
inline std::size_t pos_of_flat(std::size_t s) { return s - ((std::size_t{1} << level_of_flat(s)) - 1); }

inline std::vector<double> flatten_details(const coefficient_tree& tree) {
  std::vector<double> flat;
  flat.reserve(tree.detail_count());
  for (const auto& level : tree.detail)
    for (double v : level) flat.push_back(v);
  return flat;
}

inline void unflatten_details(const std::vector<double>& flat, coefficient_tree& tree) {
  std::size_t s = 0;
  for (auto& level : tree.detail)
    for (double& v : level) v = flat[s++];
}

}  // namespace perfsim::wavelet

#endif  // PERFSIM_WAVELET_TRANSFORM_HPP
