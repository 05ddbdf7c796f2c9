#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hpreg/errors.hpp"
#include "hpreg/spectral_model.hpp"
#include "oracles.hpp"

using namespace hpreg;

namespace {

constexpr double kPi = std::numbers::pi;

NoiseSpec mixed_spec() {
  return NoiseSpec({{0.6, 1.5, 0.0, 2.0}, {0.4, 0.7, 1.0, 2.0}});
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<oracle::ModulatedEnvelope> oracle_terms(const NoiseSpec& spec) {
  std::vector<oracle::ModulatedEnvelope> out;
  for (const auto& c : spec.components()) {
    out.push_back({c.weight, c.carrier, [c](double t) {
                     return std::pow(1.0 + std::pow(std::abs(t), c.shape), -c.decay / 2.0);
                   }});
  }
  return out;
}

}  // namespace

TEST(BesselK, HalfOrderClosedForm) {
  EXPECT_NEAR(bessel_k(0.5, 1.0), std::sqrt(kPi / 2.0) * std::exp(-1.0), 1e-12);
  for (double z = 0.01; z <= 20.0; z *= 1.3) {
    const double exact = std::sqrt(kPi / (2.0 * z)) * std::exp(-z);
    EXPECT_LT(rel(bessel_k(0.5, z), exact), 1e-10) << "z=" << z;
  }
}

TEST(BesselK, EvenInOrder) {
  EXPECT_DOUBLE_EQ(bessel_k(-0.3, 2.0), bessel_k(0.3, 2.0));
}

TEST(BesselK, AgreesWithSeriesExpansion) {
  for (double nu : {0.0, 0.3, 1.0, 1.2, 1.7}) {
    for (double z : {0.05, 0.2, 0.7, 1.0, 2.0}) {
      EXPECT_LT(rel(bessel_k(nu, z), oracle::bessel_k_series(nu, z)), 1e-8) << nu << " " << z;
    }
  }
}

TEST(BesselK, AgreesWithStandardLibrary) {
  for (double nu : {0.0, 0.25, 2.5, 7.0}) {
    for (double z : {1e-6, 1e-3, 0.5, 5.0, 30.0}) {
      EXPECT_LT(rel(bessel_k(nu, z), std::cyl_bessel_k(nu, z)), 1e-10) << nu << " " << z;
    }
  }
}

TEST(BesselK, Recurrence) {
  for (double nu = 0.1; nu < 6.0; nu += 0.7) {
    for (double z : {0.01, 0.3, 1.0, 4.0, 15.0}) {
      const double lhs = bessel_k(nu + 1.0, z);
      const double rhs = bessel_k(nu - 1.0, z) + 2.0 * nu / z * bessel_k(nu, z);
      EXPECT_LT(rel(lhs, rhs), 1e-8) << nu << " " << z;
    }
  }
}

TEST(BesselK, Errors) {
  try {
    bessel_k(1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain);
  }
  try {
    bessel_k(50.0, 1e-8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::overflow);
  }
  EXPECT_THROW(bessel_k(51.0, 1.0), Error);
}

TEST(NoiseSpec, Validation) {
  EXPECT_THROW(NoiseSpec({{0.5, 1.0, 0.0, 2.0}}), Error);
  EXPECT_THROW(NoiseSpec({{0.5, 1.0, 1.0, 2.0}, {0.5, 1.0, 1.0, 2.0}}), Error);
  EXPECT_THROW(NoiseSpec({{1.0, 0.0, 0.0, 2.0}}), Error);
  EXPECT_THROW(NoiseSpec({{1.0, 1.0, 0.0, 2.5}}), Error);
  EXPECT_THROW(NoiseSpec({}), Error);
  EXPECT_DOUBLE_EQ(mixed_spec().min_decay(), 0.7);
}

TEST(NoiseSpec, ConfigRoundTrip) {
  const auto spec = mixed_spec();
  const auto back = NoiseSpec::from_config(ConfigDocument::parse(spec.to_config()));
  ASSERT_EQ(back.components().size(), 2u);
  EXPECT_EQ(back.components()[1].carrier, 1.0);
  EXPECT_EQ(back.components()[1].decay, 0.7);
  EXPECT_EQ(back.to_config(), spec.to_config());
}

TEST(Covariance, Examples) {
  EXPECT_DOUBLE_EQ(covariance(mixed_spec(), 0.0), 1.0);
  EXPECT_NEAR(covariance(NoiseSpec::single(1.0), 1.0), 1.0 / std::sqrt(2.0), 1e-15);
  for (double t : {0.3, 2.0, 17.5}) {
    EXPECT_DOUBLE_EQ(covariance(mixed_spec(), -t), covariance(mixed_spec(), t));
  }
}

TEST(Covariance, BoundedByEnvelope) {
  const auto spec = NoiseSpec({{0.3, 0.5, 0.0, 2.0}, {0.3, 1.2, 0.8, 2.0}, {0.4, 0.9, 2.5, 1.5}});
  for (double t = -50.0; t <= 50.0; t += 0.01) {
    EXPECT_LE(std::abs(covariance(spec, t)), covariance_envelope(spec, t) + 1e-15);
  }
}

TEST(SpectralDensity, IntegratesToOne) {
  for (const auto& spec : {NoiseSpec::single(0.5, 2.0), NoiseSpec::single(1.5), mixed_spec(),
                           NoiseSpec::single(1.0, 1.0)}) {
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_NEAR(integrate_spectral_density(spec, -inf, inf), 1.0, 1e-6);
  }
}

TEST(SpectralDensity, MatchesCosineTransformOfCovariance) {
  const auto spec = mixed_spec();
  for (double lambda : {0.37, 0.05, 1.9, 4.0}) {
    EXPECT_NEAR(spectral_density(spec, lambda),
                oracle::cosine_transform_density(oracle_terms(spec), lambda), 1e-6)
        << lambda;
  }
}

TEST(SpectralDensity, Even) {
  const auto spec = mixed_spec();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_NEAR(spectral_density(spec, x), spectral_density(spec, -x), 1e-12);
  }
}

TEST(SpectralDensity, LimitAtZeroForShortMemory) {
  const double alpha = 1.5;
  const double limit =
      std::tgamma((alpha - 1.0) / 2.0) / (2.0 * std::sqrt(kPi) * std::tgamma(alpha / 2.0));
  EXPECT_LT(rel(spectral_density(NoiseSpec::single(alpha), 1e-6), limit), 1e-3);
  // alpha > 1 is bounded at its own carrier.
  EXPECT_TRUE(std::isfinite(spectral_density(NoiseSpec::single(alpha, 1.0), 1.0)));
}

TEST(SpectralDensity, PowerLawNearSingularPoint) {
  EXPECT_NEAR(spectral_constant_c2(0.5), 0.398942, 1e-6);
  // kappa = 0: the whole component mass sits at one singular point.
  const auto centred = NoiseSpec::single(0.5, 0.0);
  const double eps = 1e-8;
  EXPECT_NEAR(spectral_density(centred, eps) / (spectral_constant_c2(0.5) * std::pow(eps, -0.5)),
              1.0, 1e-3);
  // kappa = 2: the cos(kappa t) modulation splits it evenly between +-kappa,
  // so the leading coefficient at each point is c2 / 2.
  const auto cyclic = NoiseSpec::single(0.5, 2.0);
  const double ratio = spectral_density(cyclic, 2.0 + eps) /
                       (spectral_constant_c2(0.5) * std::pow(eps, -0.5));
  EXPECT_NEAR(ratio, 0.5, 1e-3);
}

TEST(SpectralDensity, SingularPointThrows) {
  try {
    spectral_density(NoiseSpec::single(0.5, 2.0), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singularity);
  }
}

TEST(SpectralDensity, GeneralShapeIsNumericalCosineTransform) {
  const auto spec = NoiseSpec({{1.0, 1.6, 0.7, 1.5}});
  EXPECT_FALSE(spec.has_closed_form());
  for (double lambda : {0.2, 1.1, 3.0}) {
    EXPECT_NEAR(spectral_density(spec, lambda),
                oracle::cosine_transform_density(oracle_terms(spec), lambda), 1e-7);
  }
}

TEST(SpectralDensity, FourierDuality) {
  // Midpoint-rule cosine sum of sampled f recovers B at small lags.
  const auto spec = NoiseSpec::single(1.5);
  const double h = 1e-3;
  const double upper = 40.0;
  std::vector<double> grid;
  std::vector<double> values;
  for (double x = h / 2; x < upper; x += h) {
    grid.push_back(x);
    values.push_back(spectral_density(spec, x));
  }
  for (double t : {0.0, 0.5, 1.0, 2.0}) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sum += values[i] * std::cos(grid[i] * t);
    EXPECT_NEAR(2.0 * h * sum, covariance(spec, t), 1e-4) << t;
  }
}

TEST(SingularPoints, Counts) {
  auto freqs = [](const NoiseSpec& s) {
    std::vector<double> out;
    for (const auto& p : singular_points(s)) out.push_back(p.frequency);
    return out;
  };
  const auto a = NoiseSpec({{0.5, 0.5, 0.0, 2.0}, {0.5, 0.5, 2.0, 2.0}});
  EXPECT_EQ(freqs(a), (std::vector<double>{-2.0, 0.0, 2.0}));
  const auto b = NoiseSpec({{0.5, 0.4, 1.0, 2.0}, {0.5, 0.6, 3.0, 2.0}});
  EXPECT_EQ(freqs(b), (std::vector<double>{-3.0, -1.0, 1.0, 3.0}));
  EXPECT_TRUE(singular_points(NoiseSpec({{0.5, 1.2, 0.0, 2.0}, {0.5, 3.0, 1.0, 2.0}})).empty());
  const auto log_type = singular_points(NoiseSpec::single(1.0, 1.0));
  ASSERT_EQ(log_type.size(), 2u);
  EXPECT_TRUE(log_type[0].logarithmic);
}
