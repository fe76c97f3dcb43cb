#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "chi2nn/data.hpp"
#include "chi2nn/pca.hpp"
#include "oracles.hpp"

using namespace chi2nn;

namespace {

// Roots of the characteristic polynomial of a symmetric 2x2 or 3x3 matrix,
// descending.
std::vector<double> char_poly_roots(const Matrix& a) {
  if (a.rows() == 2) {
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return {tr / 2.0 + disc, tr / 2.0 - disc};
  }
  // Trigonometric solution of the depressed cubic.
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
  const double p2 = std::pow(a(0, 0) - q, 2) + std::pow(a(1, 1) - q, 2) + std::pow(a(2, 2) - q, 2) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Matrix b(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = (a(i, j) - (i == j ? q : 0.0)) / p;
  const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                      b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                      b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(detb / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double pi = std::acos(-1.0);
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * pi / 3.0);
  return {e1, 3.0 * q - e1 - e3, e3};
}

Matrix sample_data(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  auto x = oracle::random_matrix(gen, n, d);
  // correlate the columns a little
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j < d; ++j) x(i, j) += 0.5 * x(i, j - 1) * static_cast<double>(j);
  return x;
}

Matrix random_rotation(std::mt19937_64& gen, std::size_t d) {
  // Gram-Schmidt on a random matrix
  auto m = oracle::random_matrix(gen, d, d);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0;
      for (std::size_t r = 0; r < d; ++r) dot += m(r, c) * m(r, p);
      for (std::size_t r = 0; r < d; ++r) m(r, c) -= dot * m(r, p);
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < d; ++r) nrm += m(r, c) * m(r, c);
    nrm = std::sqrt(nrm);
    for (std::size_t r = 0; r < d; ++r) m(r, c) /= nrm;
  }
  return m;
}

void expect_model_invariants(const pca::Model& m) {
  const std::size_t d = m.dims();
  const Matrix gram = m.axes.transposed() * m.axes;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(gram(i, j), i == j ? 1.0 : 0.0, 1e-9);
  for (std::size_t k = 0; k < d; ++k) {
    EXPECT_GE(m.eigenvalues[k], 0.0);
    if (k) {
      EXPECT_LE(m.eigenvalues[k], m.eigenvalues[k - 1]);
    }
  }
  double total = 0.0;
  for (double c : m.contribution) total += c;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

}  // namespace

TEST(Jacobi, MatchesCharacteristicPolynomial) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = trial % 2 ? 3 : 2;
    auto x = sample_data(gen, 12, d);
    auto m = pca::fit(x);
    std::vector<double> mean(d, 0.0), ones(d, 1.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / static_cast<double>(x.rows());
    auto roots = char_poly_roots(pca::covariance(x, mean, ones));
    for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(m.eigenvalues[k], roots[k], 1e-9);
  }
}

TEST(Jacobi, DiagonalisesSymmetricMatrix) {
  std::mt19937_64 gen(5);
  auto b = oracle::random_matrix(gen, 6, 6);
  Matrix a = b.transposed() * b;
  auto r = pca::jacobi_eigen(a);
  // A V = V diag(lambda)
  Matrix av = a * r.vectors;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(av(i, k), r.vectors(i, k) * r.eigenvalues[k], 1e-10);
}

TEST(Pca, DiagonalCovarianceContribution) {
  // variances 4 and 1 on the axes
  Matrix x = Matrix::from_rows({{2, 0}, {-2, 0}, {0, 1}, {0, -1}, {2, 0}, {-2, 0}, {0, 1}, {0, -1}});
  auto m = pca::fit(x);
  EXPECT_NEAR(m.contribution[0], 0.8, 1e-12);
  EXPECT_NEAR(m.contribution[1], 0.2, 1e-12);
  EXPECT_NEAR(m.axes(0, 0), 1.0, 1e-12);
}

TEST(Pca, RotationInvariantSpectrum) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = sample_data(gen, 40, 5);
    auto rot = random_rotation(gen, 5);
    auto a = pca::fit(x), b = pca::fit(x * rot);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(a.eigenvalues[k], b.eigenvalues[k], 1e-9);
  }
}

TEST(Pca, InvariantsAcrossVariants) {
  std::mt19937_64 gen(8);
  for (auto v : {pca::Variant::covariance, pca::Variant::correlation, pca::Variant::range}) {
    auto m = pca::fit(sample_data(gen, 30, 4), v);
    expect_model_invariants(m);
    EXPECT_FALSE(m.degenerate);
  }
}

TEST(Pca, SignConventionLargestEntryPositive) {
  std::mt19937_64 gen(9);
  auto m = pca::fit(sample_data(gen, 50, 4));
  for (std::size_t k = 0; k < 4; ++k) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < 4; ++j)
      if (std::fabs(m.axes(j, k)) > std::fabs(m.axes(arg, k))) arg = j;
    EXPECT_GT(m.axes(arg, k), 0.0);
  }
}

TEST(Pca, ProjectedColumnsUncorrelatedWithEigenvalueVariance) {
  std::mt19937_64 gen(10);
  auto x = sample_data(gen, 80, 4);
  auto m = pca::fit(x);
  auto z = pca::project(m, x, 4);
  std::vector<double> zero(4, 0.0), ones(4, 1.0);
  auto c = pca::covariance(z, zero, ones);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) {
        EXPECT_NEAR(c(i, i), m.eigenvalues[i], 1e-9 * m.eigenvalues[0]);
      } else {
        EXPECT_LE(std::fabs(c(i, j)), 1e-8 * m.eigenvalues[0]);
      }
    }
}

TEST(Pca, ProjectMeanIsZeroAndFullReconstructionExact) {
  std::mt19937_64 gen(12);
  auto x = sample_data(gen, 25, 3);
  auto m = pca::fit(x);
  Matrix mean_row(1, 3);
  for (std::size_t j = 0; j < 3; ++j) mean_row(0, j) = m.mean[j];
  for (std::size_t L = 1; L <= 3; ++L) {
    const auto z = pca::project(m, mean_row, L);
    for (double v : z.data()) EXPECT_NEAR(v, 0.0, 1e-12);
  }
  auto z = pca::project(m, x, 3);
  auto back = z * m.axes.transposed();
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(back(i, j) + m.mean[j], x(i, j), 1e-9);
}

TEST(Pca, HandEigenpairTwoByTwo) {
  // Samples whose covariance is [[2,1],[1,2]]: eigenvalues 3 and 1, axis (1,1)/sqrt2.
  const double a = std::sqrt(3.0), b = 1.0;
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<std::vector<double>> rows;
  for (double sa : {1.0, -1.0})
    for (double sb : {1.0, -1.0}) rows.push_back({s * (sa * a + sb * b), s * (sa * a - sb * b)});
  Matrix x = Matrix::from_rows(rows);
  auto m = pca::fit(x);
  EXPECT_NEAR(m.eigenvalues[0] / m.eigenvalues[1], 3.0, 1e-12);
  EXPECT_NEAR(m.axes(0, 0), s, 1e-12);
  EXPECT_NEAR(m.axes(1, 0), s, 1e-12);
  auto z = pca::project(m, x, 1);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(z(i, 0), s * (x(i, 0) + x(i, 1)), 1e-12);
}

TEST(Pca, ConstantInputIsDegenerate) {
  Matrix x(5, 3, 2.5);
  auto m = pca::fit(x);
  EXPECT_TRUE(m.degenerate);
  for (double c : m.contribution) EXPECT_NEAR(c, 1.0 / 3.0, 1e-15);
  for (double e : m.eigenvalues) EXPECT_EQ(e, 0.0);
}

TEST(Pca, RejectsBadInput) {
  EXPECT_THROW(pca::fit(Matrix(1, 3)), DomainError);
  Matrix x(4, 2);
  x(1, 1) = NAN;
  EXPECT_THROW(pca::fit(x), DomainError);
  auto m = pca::fit(Matrix::from_rows({{0, 1}, {1, 0}, {2, 2}}));
  EXPECT_THROW(pca::project(m, Matrix(2, 2), 0), DomainError);
  EXPECT_THROW(pca::project(m, Matrix(2, 2), 3), DomainError);
  EXPECT_THROW(pca::project(m, Matrix(2, 3), 1), DomainError);
}

TEST(Pca, RangeVariantIgnoresFeatureUnits) {
  std::mt19937_64 gen(4);
  auto x = sample_data(gen, 30, 3);
  auto y = x;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    y(i, 0) = 1000.0 * y(i, 0) + 7.0;
    y(i, 2) *= 0.01;
  }
  auto a = pca::fit(x, pca::Variant::range), b = pca::fit(y, pca::Variant::range);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.contribution[k], b.contribution[k], 1e-12);
  auto c = pca::fit(x, pca::Variant::correlation), d = pca::fit(y, pca::Variant::correlation);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(c.contribution[k], d.contribution[k], 1e-12);
}

TEST(SelectCount, SmallestPrefixReachingThreshold) {
  std::vector<double> c1 = {0.95, 0.05};
  EXPECT_EQ(pca::select_count(c1, 0.90), 1u);
  std::vector<double> bcw = {0.6905, 0.0720, 0.0605, 0.0444, 0.0390, 0.0936};
  EXPECT_EQ(pca::select_count(bcw, 0.90), 5u);
  std::vector<double> balloons = {0.2767, 0.2621, 0.2372, 0.2240};
  EXPECT_EQ(pca::select_count(balloons, 0.90), 4u);
  std::vector<double> exact = {0.5, 0.4, 0.1};
  EXPECT_EQ(pca::select_count(exact, 0.90), 2u);
  EXPECT_EQ(pca::select_count(exact, 1.0), 3u);
  EXPECT_THROW(pca::select_count(exact, 0.0), DomainError);
  EXPECT_THROW(pca::select_count(exact, 1.5), DomainError);
}

TEST(Pca, IrisRangeVariantReproducesPublishedRates) {
  const std::filesystem::path dir = std::filesystem::path(CHI2NN_DATA_DIR) / "iris";
  if (!std::filesystem::exists(dir / "iris.data")) GTEST_SKIP();
  auto ds = load_dataset(DatasetId::iris, dir);
  auto cum = pca::fit(ds.features, pca::Variant::range).cumulative();
  const double published[] = {0.8605, 0.9688, 0.9942, 1.0};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(cum[k], published[k], 5e-5);
}
