#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chi2nn/errors.hpp"
#include "chi2nn/matrix.hpp"

namespace chi2nn::pca {

// covariance: eigen-decompose the sample covariance of the raw features.
// correlation: standardise each feature first (sample std), i.e. decompose
// the correlation matrix.
// range: rescale each feature to [-1, 1] by its observed range, then
// decompose the covariance.
enum class Variant { covariance, correlation, range };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::covariance: return "covariance";
    case Variant::correlation: return "correlation";
    case Variant::range: return "range";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "covariance") return Variant::covariance;
  if (s == "correlation") return Variant::correlation;
  if (s == "range") return Variant::range;
  throw ConfigError("unknown PCA variant '" + std::string(s) + "'");
}

struct Model {
  Variant variant = Variant::covariance;
  std::vector<double> mean;
  std::vector<double> scale;  // 1, sample std, or half range per variant
  Matrix axes;                // d x d, column k is the k-th principal axis
  std::vector<double> eigenvalues;
  std::vector<double> contribution;
  bool degenerate = false;  // all eigenvalues zero

  std::size_t dims() const { return mean.size(); }

  std::vector<double> cumulative() const {
    std::vector<double> c(contribution.size());
    std::partial_sum(contribution.begin(), contribution.end(), c.begin());
    return c;
  }
};

struct JacobiResult {
  std::vector<double> eigenvalues;
  Matrix vectors;  // columns
  int sweeps = 0;
};

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Sweeps until the
/// off-diagonal Frobenius norm drops to `tol` times the matrix norm (or 1,
/// whichever is larger).
inline JacobiResult jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 100) {
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);
  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  const double target = tol * std::max(1.0, std::sqrt(frob));

  int sweep = 0;
  for (; sweep < max_sweeps && off_diagonal_norm(a) > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (p,q) rotation
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  JacobiResult r;
  r.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.eigenvalues[i] = a(i, i);
  r.vectors = std::move(v);
  r.sweeps = sweep;
  return r;
}

/// Sample covariance (divisor n-1) of the rows of x after centring and
/// dividing by `scale`.
inline Matrix covariance(const Matrix& x, std::span<const double> mean,
                         std::span<const double> scale) {
  const std::size_t n = x.rows(), d = x.cols();
  Matrix c(d, d);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) z[j] = (r[j] - mean[j]) / scale[j];
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = j; k < d; ++k) c(j, k) += z[j] * z[k];
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = j; k < d; ++k) c(k, j) = c(j, k) = c(j, k) / denom;
  return c;
}

inline Model fit(const Matrix& x, Variant variant = Variant::covariance) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2 || d < 1) throw DomainError("pca::fit: need n >= 2 rows and d >= 1 columns");
  for (double v : x.data())
    if (!std::isfinite(v)) throw DomainError("pca::fit: non-finite input");

  Model m;
  m.variant = variant;
  m.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += x(i, j);
  for (auto& v : m.mean) v /= static_cast<double>(n);

  m.scale.assign(d, 1.0);
  if (variant == Variant::correlation) {
    for (std::size_t j = 0; j < d; ++j) {
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - m.mean[j]) * (x(i, j) - m.mean[j]);
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      m.scale[j] = sd > 0.0 ? sd : 1.0;  // constant columns stay zero after centring
    }
  } else if (variant == Variant::range) {
    for (std::size_t j = 0; j < d; ++j) {
      double lo = x(0, j), hi = x(0, j);
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, x(i, j));
        hi = std::max(hi, x(i, j));
      }
      m.scale[j] = hi > lo ? 0.5 * (hi - lo) : 1.0;
    }
  }

  auto eig = jacobi_eigen(covariance(x, m.mean, m.scale));

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return eig.eigenvalues[a] > eig.eigenvalues[b];
  });

  m.axes = Matrix(d, d);
  m.eigenvalues.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t src = order[k];
    m.eigenvalues[k] = std::max(0.0, eig.eigenvalues[src]);
    // Flip so the largest-magnitude entry of each axis is positive.
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (std::fabs(eig.vectors(j, src)) > std::fabs(eig.vectors(arg, src))) arg = j;
    const double sign = eig.vectors(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) m.axes(j, k) = sign * eig.vectors(j, src);
  }

  const double total = std::accumulate(m.eigenvalues.begin(), m.eigenvalues.end(), 0.0);
  m.contribution.resize(d);
  if (total > 0.0) {
    for (std::size_t k = 0; k < d; ++k) m.contribution[k] = m.eigenvalues[k] / total;
  } else {
    m.degenerate = true;
    std::fill(m.contribution.begin(), m.contribution.end(), 1.0 / static_cast<double>(d));
  }
  return m;
}

/// Smallest L whose leading L contributions reach `threshold`.
inline std::size_t select_count(std::span<const double> contribution, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw DomainError("pca::select_count: threshold must be in (0,1]");
  double cum = 0.0;
  for (std::size_t k = 0; k < contribution.size(); ++k) {
    cum += contribution[k];
    if (cum >= threshold - 1e-12) return k + 1;
  }
  return contribution.size();
}

inline std::size_t select_count(const Model& m, double threshold) {
  return select_count(m.contribution, threshold);
}

/// Scores on the first L axes: ((x - mean) / scale) * axes[:, :L].
inline Matrix project(const Model& m, const Matrix& x, std::size_t components) {
  const std::size_t d = m.dims();
  if (components < 1 || components > d)
    throw DomainError("pca::project: component count out of range");
  if (x.cols() != d) throw DomainError("pca::project: column count does not match model");
  Matrix out(x.rows(), components);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) z[j] = (r[j] - m.mean[j]) / m.scale[j];
    for (std::size_t k = 0; k < components; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += z[j] * m.axes(j, k);
      out(i, k) = s;
    }
  }
  return out;
}

}  // namespace chi2nn::pca
