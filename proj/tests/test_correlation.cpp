#include <gtest/gtest.h>

#include "stairward/correlation.hpp"
#include "support.hpp"

using namespace stairward;
using V = std::vector<double>;

TEST(Srocc, Examples) {
  EXPECT_EQ(srocc(V{1, 2, 3}, V{10, 20, 30}), 1.0);
  EXPECT_EQ(srocc(V{1, 2, 3}, V{30, 20, 10}), -1.0);
  EXPECT_NEAR(srocc(V{1, 2, 3, 4}, V{1, 3, 2, 4}), 0.8, 1e-15);
  EXPECT_NEAR(srocc(V{1, 2, 3, 4}, V{1, 3, 2, 4}), testkit::oracle_spearman({1, 2, 3, 4}, {1, 3, 2, 4}), 1e-15);
}

TEST(Krocc, Examples) {
  EXPECT_EQ(krocc(V{1, 2, 3}, V{1, 2, 3}), 1.0);
  EXPECT_NEAR(krocc(V{1, 2, 3}, V{1, 3, 2}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(krocc(V{1, 1, 2}, V{1, 2, 3}), testkit::oracle_kendall({1, 1, 2}, {1, 2, 3}), 1e-15);
  EXPECT_NEAR(krocc(V{1, 1, 2}, V{1, 2, 3}), 2.0 / std::sqrt(6.0), 1e-15);
}

TEST(Plcc, Examples) {
  EXPECT_NEAR(plcc(V{1, 2, 3, 4}, V{3, 5, 7, 9}), 1.0, 1e-15);
  EXPECT_NEAR(plcc(V{1, 2, 3, 4}, V{-1, -2, -3, -4}), -1.0, 1e-15);
  // Co-moment 4.5 over sqrt(5 * 4.75) for the centered vectors.
  EXPECT_NEAR(plcc(V{0, 1, 2, 3}, V{0, 1, 1, 3}), 4.5 / std::sqrt(5.0 * 4.75), 1e-12);
  EXPECT_NEAR(plcc(V{0, 1, 2, 3}, V{0, 1, 1, 3}), testkit::oracle_pearson({0, 1, 2, 3}, {0, 1, 1, 3}), 1e-12);
}

TEST(Correlation, Preconditions) {
  EXPECT_THROW(plcc(V{1, 2}, V{1, 2}), Error);
  EXPECT_THROW(plcc(V{1, 2, 3}, V{1, 2}), Error);
  EXPECT_THROW(plcc(V{1, 1, 1}, V{1, 2, 3}), Error);
  EXPECT_THROW(srocc(V{1, 2, std::nan("")}, V{1, 2, 3}), Error);
  EXPECT_THROW(krocc(V{2, 2, 2}, V{1, 2, 3}), Error);
}

TEST(FractionalRanks, AverageTies) {
  EXPECT_EQ(fractional_ranks(V{10, 20, 20, 5}), (V{2, 3.5, 3.5, 1}));
}

TEST(CorrelationProperty, AgreesWithBruteForce) {
  testkit::Gen g(1234);
  int checked = 0;
  while (checked < 1000) {
    const auto n = static_cast<std::size_t>(g.integer(3, 12));
    const auto x = g.vec(n);
    const auto y = g.vec(n);
    if (!testkit::has_variance(x) || !testkit::has_variance(y)) continue;
    ++checked;
    ASSERT_NEAR(plcc(x, y), testkit::oracle_pearson(x, y), 1e-9);
    ASSERT_NEAR(srocc(x, y), testkit::oracle_spearman(x, y), 1e-9);
    ASSERT_NEAR(krocc(x, y), testkit::oracle_kendall(x, y), 1e-9);
    ASSERT_EQ(srocc(x, y), plcc(fractional_ranks(x), fractional_ranks(y)));
  }
}

TEST(CorrelationProperty, InvariantUnderIncreasingTransforms) {
  testkit::Gen g(4321);
  for (int t = 0; t < 300; ++t) {
    const auto n = static_cast<std::size_t>(g.integer(3, 40));
    const auto x = g.vec(n);
    const auto y = g.vec(n);
    if (!testkit::has_variance(x) || !testkit::has_variance(y)) continue;
    const double a = g.real(0.1, 10), b = g.real(-5, 5);
    V ax, cube;
    for (double v : x) {
      ax.push_back(a * v + b);
      cube.push_back(v * v * v);
    }
    EXPECT_NEAR(plcc(ax, y), plcc(x, y), 1e-9);
    EXPECT_EQ(srocc(cube, y), srocc(x, y));
    EXPECT_EQ(krocc(cube, y), krocc(x, y));
    EXPECT_LE(std::abs(plcc(x, y)), 1.0);
  }
}
