#pragma once

// Equal-width partition of the reduced input space into M = K^L sections and
// the per-section tallies (N_i rows, c_i positives) that the chi-square cost
// is built from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chi2nn/errors.hpp"
#include "chi2nn/matrix.hpp"

namespace chi2nn {

inline constexpr std::size_t kMaxSections = std::size_t{1} << 20;

struct BinGrid {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<bool> degenerate;  // zero spread in that dimension
  std::size_t sections_per_dim = 2;
  std::size_t sections = 1;

  std::size_t dims() const { return lo.size(); }
  double width(std::size_t k) const {
    return (hi[k] - lo[k]) / static_cast<double>(sections_per_dim);
  }
};

struct BinStats {
  std::vector<std::size_t> counts;     // N_i
  std::vector<std::size_t> positives;  // c_i
  std::vector<double> share;           // p_i = c_i / N
  std::vector<double> expected;        // m_i = N p_i
  std::size_t total = 0;               // N

  std::size_t sections() const { return counts.size(); }
};

/// Column-wise min/max bounds of the training rows.
inline BinGrid fit_grid(const Matrix& x, std::size_t sections_per_dim) {
  if (sections_per_dim < 1) throw DomainError("fit_grid: K must be >= 1");
  if (x.rows() < 1) throw DomainError("fit_grid: need at least one row");
  const std::size_t dims = x.cols();

  std::size_t m = 1;
  for (std::size_t k = 0; k < dims; ++k) {
    if (m > kMaxSections / sections_per_dim)
      throw ConfigError("fit_grid: K^L exceeds 2^20 sections (K=" +
                        std::to_string(sections_per_dim) + ", L=" + std::to_string(dims) + ")");
    m *= sections_per_dim;
  }

  BinGrid g;
  g.sections_per_dim = sections_per_dim;
  g.sections = m;
  g.lo.assign(dims, 0.0);
  g.hi.assign(dims, 0.0);
  g.degenerate.assign(dims, false);
  for (std::size_t k = 0; k < dims; ++k) {
    double lo = x(0, k), hi = x(0, k);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double v = x(i, k);
      if (!std::isfinite(v)) throw DomainError("fit_grid: non-finite input");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    g.lo[k] = lo;
    g.hi[k] = hi;
    g.degenerate[k] = !(lo < hi);
  }
  return g;
}

/// Mixed-radix section index, sum_k d_k K^k. Coordinates outside the grid
/// clamp to the boundary section; the top edge belongs to section K-1.
inline std::size_t bin_index(const BinGrid& g, std::span<const double> x) {
  const std::size_t k_max = g.sections_per_dim - 1;
  std::size_t index = 0;
  std::size_t radix = 1;
  for (std::size_t k = 0; k < g.dims(); ++k) {
    std::size_t d = 0;
    if (!g.degenerate[k]) {
      const double t = std::floor((x[k] - g.lo[k]) / g.width(k));
      if (t >= static_cast<double>(k_max)) d = k_max;
      else if (t > 0.0) d = static_cast<std::size_t>(t);
    }
    index += d * radix;
    radix *= g.sections_per_dim;
  }
  return index;
}

inline std::vector<std::size_t> bin_indices(const BinGrid& g, const Matrix& x) {
  std::vector<std::size_t> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = bin_index(g, x.row(i));
  return out;
}

inline BinStats compute_stats(const BinGrid& g, const Matrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) throw DomainError("compute_stats: rows and labels differ in length");
  if (x.rows() == 0) throw DomainError("compute_stats: N = 0");
  BinStats s;
  s.total = x.rows();
  s.counts.assign(g.sections, 0);
  s.positives.assign(g.sections, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t b = bin_index(g, x.row(i));
    ++s.counts[b];
    if (y[i] == 1) ++s.positives[b];
  }
  const double n = static_cast<double>(s.total);
  s.share.resize(g.sections);
  s.expected.resize(g.sections);
  for (std::size_t i = 0; i < g.sections; ++i) {
    s.share[i] = static_cast<double>(s.positives[i]) / n;
    s.expected[i] = static_cast<double>(s.positives[i]);  // N * p_i, exactly
  }
  return s;
}

struct ChiSquareStat {
  double eta = 0.0;
  int effective_df = 1;
  // No section has a positive expectation; the stop rule cannot be applied.
  bool degenerate = false;
  // Predicted positives that landed in sections with m_i = 0. Those terms of
  // the Pearson sum are (v - 0)^2 / 0 and are left out of eta, so they are
  // reported separately.
  double unexpected = 0.0;
};

/// Pearson statistic over the sections with m_i > 0.
inline ChiSquareStat chi_square_stat(std::span<const double> v, std::span<const double> m) {
  if (v.size() != m.size()) throw DomainError("chi_square_stat: length mismatch");
  ChiSquareStat r;
  int used = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0 || m[i] < 0.0) throw DomainError("chi_square_stat: negative count");
    if (m[i] > 0.0) {
      const double d = v[i] - m[i];
      r.eta += d * d / m[i];
      ++used;
    } else {
      r.unexpected += v[i];
    }
  }
  r.degenerate = used == 0;
  r.effective_df = std::max(1, used - 1);
  return r;
}

}  // namespace chi2nn
