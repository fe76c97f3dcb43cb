#include <gtest/gtest.h>

#include <random>

#include "chi2nn/binning.hpp"
#include "oracles.hpp"

using namespace chi2nn;

TEST(Grid, OneDimensionalHalves) {
  Matrix x = Matrix::from_rows({{0}, {3}, {10}});
  auto g = fit_grid(x, 2);
  EXPECT_EQ(g.sections, 2u);
  EXPECT_EQ(g.width(0), 5.0);
  EXPECT_EQ(bin_index(g, std::vector<double>{0.0}), 0u);
  EXPECT_EQ(bin_index(g, std::vector<double>{4.999}), 0u);
  EXPECT_EQ(bin_index(g, std::vector<double>{5.0}), 1u);
  EXPECT_EQ(bin_index(g, std::vector<double>{10.0}), 1u);
}

TEST(Grid, SectionCountIsKPowL) {
  std::mt19937_64 gen(1);
  EXPECT_EQ(fit_grid(oracle::random_matrix(gen, 10, 5), 2).sections, 32u);
  EXPECT_EQ(fit_grid(oracle::random_matrix(gen, 10, 3), 4).sections, 64u);
  EXPECT_EQ(fit_grid(oracle::random_matrix(gen, 10, 2), 1).sections, 1u);
}

TEST(Grid, Guards) {
  EXPECT_THROW(fit_grid(Matrix(3, 2), 0), DomainError);
  EXPECT_THROW(fit_grid(Matrix(0, 2), 2), DomainError);
  EXPECT_THROW(fit_grid(Matrix(3, 21), 2), ConfigError);
  EXPECT_NO_THROW(fit_grid(Matrix(3, 20), 2));
  Matrix bad(2, 1);
  bad(0, 0) = INFINITY;
  EXPECT_THROW(fit_grid(bad, 2), DomainError);
}

TEST(Grid, ConstantColumnIsDegenerate) {
  Matrix x = Matrix::from_rows({{1, 7}, {2, 7}, {3, 7}});
  auto g = fit_grid(x, 3);
  EXPECT_FALSE(g.degenerate[0]);
  EXPECT_TRUE(g.degenerate[1]);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(bin_index(g, x.row(i)), 3u);
}

TEST(BinIndex, CornersAndClamping) {
  Matrix x = Matrix::from_rows({{0, -1, 5}, {4, 1, 9}});
  auto g = fit_grid(x, 4);
  EXPECT_EQ(bin_index(g, x.row(0)), 0u);
  EXPECT_EQ(bin_index(g, x.row(1)), g.sections - 1);
  EXPECT_EQ(bin_index(g, std::vector<double>{-100, -100, -100}), 0u);
  EXPECT_EQ(bin_index(g, std::vector<double>{100, 100, 100}), g.sections - 1);
  // mixed radix: d = (1, 2, 3) -> 1 + 2*4 + 3*16
  EXPECT_EQ(bin_index(g, std::vector<double>{1.5, 0.2, 8.5}), 1u + 8u + 48u);
}

TEST(BinIndex, MatchesBruteForceMembership) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> dim(1, 3), sec(1, 4);
  std::size_t points = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t L = dim(gen), K = sec(gen);
    auto train = oracle::random_matrix(gen, 20, L, -3.0, 5.0);
    auto g = fit_grid(train, K);
    auto probe = oracle::random_matrix(gen, 200, L, -3.0, 5.0);
    for (std::size_t i = 0; i < probe.rows(); ++i, ++points) {
      auto row = probe.row(i);
      std::vector<double> clamped(row.begin(), row.end());
      for (std::size_t k = 0; k < L; ++k) clamped[k] = std::clamp(clamped[k], g.lo[k], g.hi[k]);
      ASSERT_EQ(bin_index(g, row), oracle::brute_force_section(g, clamped));
    }
  }
  EXPECT_EQ(points, 10000u);
}

TEST(BinIndex, TranslationConsistent) {
  std::mt19937_64 gen(6);
  auto x = oracle::random_matrix(gen, 50, 3);
  auto shifted = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    shifted(i, 0) += 0.25;
    shifted(i, 1) -= 0.5;
    shifted(i, 2) += 0.125;
  }
  auto a = fit_grid(x, 3), b = fit_grid(shifted, 3);
  EXPECT_EQ(bin_indices(a, x), bin_indices(b, shifted));
}

TEST(Stats, CountsAndShares) {
  Matrix x = Matrix::from_rows({{0}, {1}, {2}, {8}, {9}, {10}});
  std::vector<int> y = {1, 0, 1, 1, 0, 0};
  auto s = compute_stats(fit_grid(x, 2), x, y);
  EXPECT_EQ(s.total, 6u);
  EXPECT_EQ(s.counts, (std::vector<std::size_t>{3, 3}));
  EXPECT_EQ(s.positives, (std::vector<std::size_t>{2, 1}));
  EXPECT_DOUBLE_EQ(s.share[0], 2.0 / 6.0);
  EXPECT_EQ(s.expected, (std::vector<double>{2.0, 1.0}));
}

TEST(Stats, PropertiesOnRandomData) {
  std::mt19937_64 gen(13);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = oracle::random_matrix(gen, 90, 2);
    std::vector<int> y(90);
    for (auto& v : y) v = coin(gen);
    auto s = compute_stats(fit_grid(x, 2), x, y);
    std::size_t n = 0, c = 0;
    double m = 0.0;
    for (std::size_t i = 0; i < s.sections(); ++i) {
      n += s.counts[i];
      c += s.positives[i];
      m += s.expected[i];
      EXPECT_LE(s.positives[i], s.counts[i]);
    }
    EXPECT_EQ(n, 90u);
    const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    EXPECT_EQ(c, pos);
    EXPECT_DOUBLE_EQ(m, static_cast<double>(pos));
  }
}

TEST(Stats, AllNegativeAndSingleSection) {
  Matrix x = Matrix::from_rows({{0}, {1}, {2}});
  auto s = compute_stats(fit_grid(x, 2), x, std::vector<int>{0, 0, 0});
  for (double p : s.share) EXPECT_EQ(p, 0.0);
  auto one = compute_stats(fit_grid(x, 1), x, std::vector<int>{1, 0, 1});
  EXPECT_DOUBLE_EQ(one.share[0], 2.0 / 3.0);
  EXPECT_EQ(one.expected[0], 2.0);
  EXPECT_THROW(compute_stats(fit_grid(x, 1), x, std::vector<int>{1}), DomainError);
  EXPECT_THROW(compute_stats(fit_grid(x, 1), Matrix(0, 1), std::vector<int>{}), DomainError);
}

TEST(ChiSquare, HandValues) {
  std::vector<double> v = {3, 7}, m = {5, 5};
  auto r = chi_square_stat(v, m);
  EXPECT_DOUBLE_EQ(r.eta, 1.6);
  EXPECT_EQ(r.effective_df, 1);
  EXPECT_EQ(chi_square_stat(m, m).eta, 0.0);
}

TEST(ChiSquare, ZeroExpectationSectionsReportedSeparately) {
  std::vector<double> v = {2, 4, 1, 0}, m = {2, 0, 1, 0};
  auto r = chi_square_stat(v, m);
  EXPECT_EQ(r.eta, 0.0);
  EXPECT_EQ(r.unexpected, 4.0);
  EXPECT_EQ(r.effective_df, 1);
  EXPECT_FALSE(r.degenerate);
  auto all_zero = chi_square_stat(std::vector<double>{1, 0}, std::vector<double>{0, 0});
  EXPECT_TRUE(all_zero.degenerate);
  EXPECT_EQ(all_zero.effective_df, 1);
}

TEST(ChiSquare, MatchesTermByTermOracle) {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> count(0, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(8), m(8);
    for (int i = 0; i < 8; ++i) {
      v[i] = count(gen);
      m[i] = count(gen) % 4 == 0 ? 0.0 : count(gen);
    }
    auto r = chi_square_stat(v, m);
    EXPECT_NEAR(r.eta, oracle::eta(v, m), 1e-12);
    EXPECT_GE(r.eta, 0.0);
    const int used = static_cast<int>(std::count_if(m.begin(), m.end(), [](double x) { return x > 0; }));
    EXPECT_EQ(r.effective_df, std::max(1, used - 1));
  }
}

TEST(ChiSquare, RejectsBadInput) {
  EXPECT_THROW(chi_square_stat(std::vector<double>{1}, std::vector<double>{1, 2}), DomainError);
  EXPECT_THROW(chi_square_stat(std::vector<double>{-1}, std::vector<double>{1}), DomainError);
}
