#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "hpreg/errors.hpp"
#include "hpreg/subordination.hpp"
#include "oracles.hpp"

using namespace hpreg;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;  // sentinel: nothing thrown
}

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

TEST(Hermite, LowOrders) {
  EXPECT_EQ(hermite(0, 3.7), 1.0);
  EXPECT_EQ(hermite(1, 3.7), 3.7);
  EXPECT_DOUBLE_EQ(hermite(2, 2.0), 3.0);
}

TEST(Hermite, MatchesMonomialExpansion) {
  EXPECT_NEAR(hermite(5, 1.3), std::pow(1.3, 5) - 10 * std::pow(1.3, 3) + 15 * 1.3, 1e-12);
  for (int k = 0; k <= 6; ++k) {
    for (double x : {-2.2, -0.4, 0.0, 0.9, 3.1}) {
      EXPECT_NEAR(hermite(k, x), oracle::hermite_monomial(k, x), 1e-10) << k << " " << x;
    }
  }
  const auto all = hermite_all(6, 0.77);
  for (int k = 0; k <= 6; ++k) EXPECT_DOUBLE_EQ(all[k], hermite(k, 0.77));
}

TEST(Hermite, OrderLimit) {
  EXPECT_NO_THROW(hermite(60, 1.0));
  EXPECT_EQ(code_of([] { hermite(61, 1.0); }), ErrorCode::overflow);
}

TEST(Hermite, GaussHermiteOrthogonality) {
  const auto& rule = gauss_hermite(32);
  for (int k = 0; k <= 15; ++k) {
    for (int l = 0; l <= 15; ++l) {
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * hermite(k, rule.nodes[i]) * hermite(l, rule.nodes[i]);
      }
      EXPECT_NEAR(sum / std::sqrt(factorial(k) * factorial(l)), k == l ? 1.0 : 0.0, 1e-8)
          << k << " " << l;
    }
  }
}

TEST(Coefficients, PolynomialTransforms) {
  const auto id = hermite_coefficients(TransformSpec::identity(), 8);
  EXPECT_NEAR(id[1], 1.0, 1e-12);
  for (int k = 2; k <= 8; ++k) EXPECT_NEAR(id[k], 0.0, 1e-12);

  const auto cube = hermite_coefficients(TransformSpec::cube(), 8);
  EXPECT_NEAR(cube[1], 3.0, 1e-12);
  EXPECT_NEAR(cube[3], 6.0, 1e-11);
  EXPECT_NEAR(cube[3] / factorial(3), 1.0, 1e-12);
  for (int k : {2, 4, 5, 6, 7, 8}) EXPECT_NEAR(cube[k], 0.0, 1e-10) << k;

  const auto h2 = hermite_coefficients(TransformSpec::hermite({0.0, 0.0, 2.0}), 6);
  EXPECT_NEAR(h2[2], 2.0, 1e-12);
  EXPECT_NEAR(h2[1], 0.0, 1e-12);
}

TEST(Coefficients, CenteredAbsoluteValue) {
  const auto c = hermite_coefficients(TransformSpec::centered_abs(), 20);
  EXPECT_NEAR(c[1], 0.0, 1e-12);
  EXPECT_NEAR(c[2], std::sqrt(2.0 / std::numbers::pi), 1e-10);
  for (int k = 1; k <= 20; ++k) {
    EXPECT_NEAR(c[k] / std::sqrt(factorial(k)),
                oracle::abs_hermite_coefficient(k) / std::sqrt(factorial(k)), 1e-9)
        << k;
  }
}

TEST(Coefficients, TableApproximatesAbs) {
  std::vector<double> xs;
  std::vector<double> gs;
  for (double x = -10.0; x <= 10.0 + 1e-9; x += 0.01) {
    xs.push_back(x);
    gs.push_back(std::abs(x) - std::sqrt(2.0 / std::numbers::pi));
  }
  // Linear interpolation of a convex function has mean bias O(h^2); shift it out.
  auto t = TransformSpec::table(xs, gs);
  const double bias = gaussian_expectation(t, 1);
  EXPECT_LT(std::abs(bias), 1e-4);
  for (auto& g : gs) g -= bias;
  const auto c = hermite_coefficients(TransformSpec::table(xs, gs), 6);
  EXPECT_NEAR(c[2], std::sqrt(2.0 / std::numbers::pi), 1e-4);
  EXPECT_NEAR(c[4], oracle::abs_hermite_coefficient(4), 1e-4);
}

TEST(Coefficients, MeanNonzero) {
  EXPECT_EQ(code_of([] { hermite_coefficients(TransformSpec::hermite({1.0, 1.0}), 4); }),
            ErrorCode::mean_nonzero);
  EXPECT_EQ(code_of([] { hermite_coefficients(TransformSpec::table({-1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}), 4); }),
            ErrorCode::mean_nonzero);
}

TEST(Rank, Examples) {
  EXPECT_EQ(hermite_rank(hermite_coefficients(TransformSpec::identity(), 6)), 1);
  EXPECT_EQ(hermite_rank(hermite_coefficients(TransformSpec::hermite({0, 0, 2}), 6)), 2);
  EXPECT_EQ(hermite_rank({0, 0, 0, 6}), 3);
  EXPECT_EQ(hermite_rank(hermite_coefficients(TransformSpec::centered_abs(), 6)), 2);
  EXPECT_EQ(code_of([] { hermite_rank({0, 1e-12, 0}); }), ErrorCode::degenerate);
}

TEST(Parseval, PolynomialTransforms) {
  for (const auto& t : {TransformSpec::identity(), TransformSpec::cube(), TransformSpec::hermite({0, 0, 2}),
                        TransformSpec::hermite({0, 0.5, -1.0, 0.3, 2.0})}) {
    const auto e = expand(t);
    EXPECT_NEAR(e.partial_sum, e.second_moment, 1e-6) << to_string(t.kind());
    EXPECT_TRUE(std::isfinite(e.fourth_moment));
  }
  EXPECT_NEAR(expand(TransformSpec::cube()).second_moment, 15.0, 1e-10);
}

TEST(Parseval, AbsWithTruncationTail) {
  const auto e = expand(TransformSpec::centered_abs());
  EXPECT_NEAR(e.second_moment, 1.0 - 2.0 / std::numbers::pi, 1e-10);
  EXPECT_NEAR(e.partial_sum + oracle::abs_hermite_tail(20), e.second_moment, 1e-6);
  EXPECT_NEAR(e.tail(), oracle::abs_hermite_tail(20), 1e-6);
  EXPECT_GT(e.tail(), 0.0);
}

TEST(SubordinatedCovariance, Examples) {
  const auto spec = NoiseSpec::single(1.5);
  const auto id = hermite_coefficients(TransformSpec::identity(), 20);
  for (double t : {0.0, 0.7, 3.0}) EXPECT_NEAR(subordinated_covariance(id, spec, t), covariance(spec, t), 1e-12);
  EXPECT_NEAR(subordinated_covariance_at({0, 0, 2}, 0.5), 0.5, 1e-15);
}

TEST(SubordinatedCovariance, LagZeroAndDomination) {
  const auto spec = NoiseSpec({{0.5, 0.8, 0.0, 2.0}, {0.5, 1.4, 1.2, 2.0}});
  for (const auto& t : {TransformSpec::cube(), TransformSpec::centered_abs(), TransformSpec::hermite({0, 0, 2})}) {
    const auto e = expand(t);
    EXPECT_NEAR(subordinated_covariance(e.coeffs, spec, 0.0), e.second_moment, std::abs(e.tail()) + 1e-9);
    for (double lag = 0.0; lag < 30.0; lag += 0.37) {
      const double b = covariance(spec, lag);
      EXPECT_LE(std::abs(subordinated_covariance(e.coeffs, spec, lag)),
                e.second_moment * std::pow(std::abs(b), e.rank) + 1e-12);
    }
  }
}

TEST(SubordinatedCovariance, MonteCarloPairs) {
  const auto spec = NoiseSpec::single(0.9, 0.4);
  const double b = covariance(spec, 1.7);
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> coeffs{0.0, u(rng), u(rng), 2 * u(rng), 4 * u(rng)};
  const auto g = TransformSpec::hermite(coeffs);
  std::normal_distribution<double> z;
  const int draws = 1000000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double z1 = z(rng);
    const double z2 = b * z1 + std::sqrt(1.0 - b * b) * z(rng);
    const double prod = g(z1) * g(z2);
    sum += prod;
    sum_sq += prod * prod;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
  EXPECT_LT(std::abs(mean - subordinated_covariance(coeffs, spec, 1.7)), 3.0 * se);
}

TEST(TransformConfig, RoundTripAndTableFile) {
  const auto h = TransformSpec::hermite({0, 0.5, 2}).set_kmax(12);
  const auto back = TransformSpec::from_config(ConfigDocument::parse(h.to_config()));
  EXPECT_EQ(back.kind(), TransformKind::hermite);
  EXPECT_EQ(back.kmax(), 12);
  EXPECT_EQ(back.explicit_coeffs(), h.explicit_coeffs());

  const auto dir = std::filesystem::temp_directory_path() / "hpreg_transform_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "g.csv");
    out << "x,G\n-1,-1\n0,0\n1,1\n";
  }
  const auto t = TransformSpec::from_config(ConfigDocument::parse("kind = table\ntable = g.csv\n"), dir);
  EXPECT_EQ(t.kind(), TransformKind::table);
  EXPECT_DOUBLE_EQ(t(2.5), 2.5);
  const auto again = TransformSpec::from_config(ConfigDocument::parse(t.to_config()));
  EXPECT_EQ(again.table_x(), t.table_x());
  EXPECT_EQ(code_of([] { TransformSpec::from_config(ConfigDocument::parse("kind = sine\n")); }),
            ErrorCode::validation);
  EXPECT_EQ(code_of([] { TransformSpec::table({0, 0}, {1, 2}); }), ErrorCode::validation);
}
