#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "hpreg/asymptotics.hpp"
#include "hpreg/errors.hpp"
#include "oracles.hpp"

using namespace hpreg;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// \int_R (1 + t^2)^{-a} dt = sqrt(pi) Gamma(a - 1/2) / Gamma(a)
double power_envelope_integral(double a) { return std::sqrt(kPi) * std::tgamma(a - 0.5) / std::tgamma(a); }

// Closed-form inverse of the Gram block scaled to (sqrt T, sqrt T, T^{3/2}).
Eigen::Matrix3d derived_closed_form(double a, double b, double s) {
  Eigen::Matrix3d m;
  m << a * a + 4 * b * b, -3 * a * b, -6 * b, -3 * a * b, 4 * a * a + b * b, 6 * a, -6 * b, 6 * a, 12;
  return 4 * kPi * s / (a * a + b * b) * m;
}

}  // namespace

TEST(SelfConvolution, FirstOrderIsTheDensity) {
  for (const auto& spec : {NoiseSpec::single(1.5), NoiseSpec({{0.6, 1.5, 0.0, 2.0}, {0.4, 1.2, 1.0, 2.0}}),
                           NoiseSpec::single(1.5, 0.0, 1.5)}) {
    for (double lambda : {0.0, 0.3, 0.9, 1.7, 3.0}) {
      EXPECT_NEAR(self_convolution(spec, 1, lambda).value, spectral_density(spec, lambda), 1e-4)
          << spec.to_config() << " lambda=" << lambda;
    }
  }
}

TEST(SelfConvolution, PowerOfSingleEnvelopeIsDensityOfScaledDecay) {
  // (1 + t^2)^{-k alpha / 2} is the covariance of the k alpha family.
  for (int k : {2, 3, 5}) {
    for (double lambda : {0.0, 0.5, 1.3, 2.5}) {
      EXPECT_NEAR(self_convolution(NoiseSpec::single(0.8), k, lambda).value,
                  spectral_density(NoiseSpec::single(0.8 * k), lambda), 1e-6)
          << "k=" << k << " lambda=" << lambda;
    }
  }
}

TEST(SelfConvolution, SecondOrderAtZeroIsSquaredDensityIntegral) {
  boost::math::quadrature::tanh_sinh<double> finite;
  boost::math::quadrature::exp_sinh<double> tail;
  for (const auto& spec : {NoiseSpec::single(1.5), NoiseSpec::single(0.8, 1.0)}) {
    auto f2 = [&](double x) {
      const double f = spectral_density(spec, x);
      return f * f;
    };
    const double kappa = spec.components().front().carrier;
    double half = tail.integrate(f2, kappa + 1.0, std::numeric_limits<double>::infinity());
    if (kappa > 0.0) {
      half += finite.integrate(f2, 0.0, kappa) + finite.integrate(f2, kappa, kappa + 1.0);
    } else {
      half += finite.integrate(f2, 0.0, 1.0);
    }
    EXPECT_NEAR(self_convolution(spec, 2, 0.0).value, 2.0 * half, 1e-5) << spec.to_config();
  }
}

TEST(SelfConvolution, MixedCarriersAgreeWithDirectTransformOfPower) {
  // B = e (1 + cos 1.1t) / 2, so B^2 = e^2 [3/8 + cos(1.1t) / 2 + cos(2.2t) / 8].
  const NoiseSpec spec({{0.5, 0.9, 0.0, 2.0}, {0.5, 0.9, 1.1, 2.0}});
  const auto env = [](double t) { return std::pow(1.0 + t * t, -0.9); };
  const std::vector<oracle::ModulatedEnvelope> terms{{0.375, 0.0, env}, {0.5, 1.1, env}, {0.125, 2.2, env}};
  for (double lambda : {0.2, 1.3, 2.5}) {
    EXPECT_NEAR(self_convolution(spec, 2, lambda).value, oracle::cosine_transform_density(terms, lambda), 1e-6)
        << lambda;
  }
}

TEST(SelfConvolution, EvenAndBounded) {
  const NoiseSpec spec({{0.7, 1.2, 0.0, 2.0}, {0.3, 0.9, 1.0, 2.0}});
  const int m = 2;
  const double bound = covariance_power_integral(spec, m) / (2 * kPi);
  for (int k = m; k <= 5; ++k) {
    for (double lambda : {0.0, 0.4, 1.0 + 1e-3, 2.0, 2.9}) {
      const double v = self_convolution(spec, k, lambda).value;
      EXPECT_EQ(v, self_convolution(spec, k, -lambda).value);
      EXPECT_LE(std::abs(v), bound) << "k=" << k << " lambda=" << lambda;
      EXPECT_GE(v, -1e-8);
    }
  }
}

TEST(SelfConvolution, ErrorEstimateAndIntegrability) {
  EXPECT_LT(self_convolution(NoiseSpec::single(1.5), 1, 1.3).error, 1e-5);
  EXPECT_EQ(code_of([] { self_convolution(NoiseSpec::single(0.8), 1, 1.0); }), ErrorCode::non_integrable);
  EXPECT_EQ(code_of([] { self_convolution(NoiseSpec::single(0.5), 2, 1.0); }), ErrorCode::non_integrable);
  EXPECT_NO_THROW(self_convolution(NoiseSpec::single(0.5), 3, 1.0));
}

TEST(CovariancePower, ClosedFormForZeroCarrier) {
  for (double alpha : {0.8, 1.5}) {
    for (int m : {2, 3}) {
      EXPECT_LT(rel(covariance_power_integral(NoiseSpec::single(alpha), m), power_envelope_integral(alpha * m / 2)),
                1e-8);
    }
  }
  // With a carrier, cos^2 = (1 + cos 2t) / 2 turns B^2 into a cosine transform.
  const double b2 = covariance_power_integral(NoiseSpec::single(1.5, 1.0), 2);
  const double expect =
      0.5 * power_envelope_integral(1.5) + oracle::fourier_cos_panels([](double t) { return std::pow(1.0 + t * t, -1.5); }, 2.0);
  EXPECT_LT(rel(b2, expect), 1e-6);
  EXPECT_LT(b2, power_envelope_integral(1.5));
}

TEST(GramBlock, Examples) {
  const double r3 = std::sqrt(3.0);
  const auto e1 = gram_block(1.0, 0.0);
  EXPECT_NEAR(e1.gram(0, 2), 0.0, 1e-15);
  EXPECT_NEAR(e1.gram(1, 2), -r3 / 2, 1e-15);
  const auto e2 = gram_block(0.0, 1.0);
  EXPECT_NEAR(e2.gram(0, 2), r3 / 2, 1e-15);
  EXPECT_NEAR(e2.gram(1, 2), 0.0, 1e-15);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    const auto g = gram_block(n(rng), n(rng));
    EXPECT_NEAR(g.gram.determinant(), 0.25, 1e-13);
    EXPECT_EQ(g.gram, g.gram.transpose());
  }
  EXPECT_EQ(code_of([] { gram_block(0.0, 0.0); }), ErrorCode::zero_amplitude);
}

TEST(GramBlock, MatchesDiscreteInnerProducts) {
  // Normalized inner products of the regression derivatives on a fine grid.
  const double a = 0.8, b = -0.6, phi = 1.3, horizon = 2000.0, step = 0.05;
  const auto n = static_cast<std::size_t>(horizon / step);
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = step * static_cast<double>(i);
    const Eigen::Vector3d d(std::cos(phi * t), std::sin(phi * t), t * (b * std::cos(phi * t) - a * std::sin(phi * t)));
    gram += d * d.transpose() * step;
  }
  const Eigen::Vector3d norms = gram.diagonal().cwiseSqrt();
  gram = norms.cwiseInverse().asDiagonal() * gram * norms.cwiseInverse().asDiagonal();
  EXPECT_LT((gram - gram_block(a, b).gram).cwiseAbs().maxCoeff(), 5e-3);
}

TEST(Gamma, DerivedExample) {
  const double s = 0.37;
  const auto g = gamma_block(1.0, 0.0, s, GammaMode::derived);
  EXPECT_NEAR(g(2, 2), 48 * kPi * s, 1e-12);
  EXPECT_NEAR(g(1, 2), 24 * kPi * s, 1e-12);
  EXPECT_NEAR(g(0, 2), 0.0, 1e-12);
  EXPECT_NEAR(g(0, 0), 4 * kPi * s, 1e-12);
  EXPECT_NEAR(g(1, 1), 16 * kPi * s, 1e-12);
}

TEST(Gamma, ModesShareOffDiagonalAndFrequencyEntries) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double a = n(rng), b = n(rng), s = u(rng);
    const auto d = gamma_block(a, b, s, GammaMode::derived);
    const auto p = gamma_block(a, b, s, GammaMode::as_printed);
    for (auto [r, c] : {std::pair{0, 1}, {0, 2}, {1, 2}, {2, 2}}) {
      EXPECT_LE(std::abs(d(r, c) - p(r, c)), 1e-10 * std::abs(p(r, c)) + 1e-14) << r << c;
    }
    EXPECT_LT((d - derived_closed_form(a, b, s)).cwiseAbs().maxCoeff(), 1e-10 * d.norm());
    EXPECT_NEAR(p(2, 2), 48 * kPi * s / (a * a + b * b), 1e-10 * p(2, 2));
    EXPECT_NEAR(p(0, 1), -12 * kPi * a * b * s / (a * a + b * b), 1e-10 * std::abs(p(0, 1)) + 1e-14);
  }
}

TEST(Gamma, DerivedIsPositiveDefiniteAsPrintedIsNot) {
  for (int i = 0; i < 72; ++i) {
    const double angle = 2 * kPi * i / 72;
    const auto d = gamma_block(std::cos(angle), std::sin(angle), 1.0, GammaMode::derived);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(d);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_LT(eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff(), 1e6);
  }
  const auto p = gamma_block(1.0, 0.0, 1.0, GammaMode::as_printed);
  // Lower 2x2 minor: 1 * 12 - 6^2 < 0.
  EXPECT_LT(p(1, 1) * p(2, 2) - p(1, 2) * p(1, 2), 0.0);
}

TEST(Gamma, IdentityTransformUsesTheDensity) {
  const auto spec = NoiseSpec::single(1.5);
  const auto g = expand(TransformSpec::identity());
  const auto factor = spectral_factor(g, spec, 1.3);
  EXPECT_NEAR(factor.value, spectral_density(spec, 1.3), 1e-6);
  EXPECT_LT(factor.tail_bound, 1e-8);
  const auto m = gamma_matrix(1.0, 0.5, 1.3, g, spec);
  EXPECT_LT((m - derived_closed_form(1.0, 0.5, factor.value)).cwiseAbs().maxCoeff(), 1e-10 * m.norm());
}

TEST(Gamma, AbsTransformReportsTailBound) {
  const auto spec = NoiseSpec::single(1.5);
  const auto g = expand(TransformSpec::centered_abs());
  const auto factor = spectral_factor(g, spec, 1.3, 20);
  EXPECT_EQ(factor.rank, 2);
  const double bm = power_envelope_integral(1.5);  // m = 2, (1 + t^2)^{-1.5}
  EXPECT_NEAR(factor.tail_bound, bm / (2 * kPi) * oracle::abs_hermite_tail(20), 1e-4 * factor.tail_bound);
  double s = 0.0;
  for (int j = 2; j <= 20; j += 2) {
    const double c = oracle::abs_hermite_coefficient(j);
    s += c * c / std::tgamma(j + 1.0) * spectral_density(NoiseSpec::single(1.5 * j), 1.3);
  }
  EXPECT_NEAR(factor.value, s, 1e-6);
  EXPECT_EQ(code_of([&] { spectral_factor(g, spec, 1.3, 40); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { spectral_factor(expand(TransformSpec::identity()), NoiseSpec::single(0.8), 1.3); }),
            ErrorCode::non_integrable);
}

TEST(SigmaGeneral, TrigonometricMeasureReproducesDerivedGamma) {
  const auto spec = NoiseSpec::single(1.5);
  const auto g = expand(TransformSpec::hermite({0, 1, 0, 0.5}));
  for (auto [a, b] : {std::pair{1.0, 0.5}, {-0.3, 0.9}, {1.0, 0.0}}) {
    const double phi = 1.1;
    const auto pair = sigma_general(g, spec, trigonometric_atoms(a, b, phi));
    const auto block = gram_block(a, b);
    const Eigen::Matrix3d d = block.scalers.cwiseInverse().asDiagonal();
    const Eigen::Matrix3d mapped = d * pair.sigma0 * d;
    const auto direct = gamma_matrix(a, b, phi, g, spec);
    EXPECT_LT((mapped - direct).cwiseAbs().maxCoeff(), 1e-10 * direct.norm());
  }
}

TEST(SigmaGeneral, SingleAtomAndErrors) {
  const auto spec = NoiseSpec::single(1.5);
  const auto g = expand(TransformSpec::identity());
  const auto pair = sigma_general(g, spec, {{0.0, Eigen::MatrixXcd::Identity(1, 1)}});
  EXPECT_NEAR(pair.sigma(0, 0), 2 * kPi * spectral_density(spec, 0.0), 1e-6);
  EXPECT_EQ(pair.sigma0(0, 0), pair.sigma(0, 0));

  EXPECT_EQ(code_of([&] { sigma_general(g, spec, {{0.5, Eigen::MatrixXcd::Zero(1, 1)}}); }),
            ErrorCode::singular_system);
  const auto rank2 = expand(TransformSpec::hermite({0, 0, 1}));
  EXPECT_EQ(code_of([&] {
              sigma_general(rank2, NoiseSpec::single(0.8, 1.0), {{1.0, Eigen::MatrixXcd::Identity(1, 1)}});
            }),
            ErrorCode::overlap);
}

TEST(PlugIn, AtTruthAndPerturbationBound) {
  const auto spec = NoiseSpec::single(1.5);
  const auto g = expand(TransformSpec::identity());
  EstimationResult r;
  r.estimate = {{1.0, 0.5, 1.3}};
  const auto plug = plug_in_gamma(r, g, spec);
  const auto truth = gamma_report({{1.0, 0.5, 1.3}}, g, spec);
  EXPECT_EQ(plug.blocks[0].gamma, truth.blocks[0].gamma);

  const double horizon = 4096.0;
  for (double dphi : {1e-6, 1e-5, 1e-4}) {
    const double lhs =
        std::abs(self_convolution(spec, 1, 1.3 + dphi).value - self_convolution(spec, 1, 1.3).value);
    EXPECT_LE(lhs, plug_in_perturbation_bound(spec, 1, horizon, 1.3 + dphi, 1.3));
  }
}

TEST(Report, TextAndCsv) {
  const auto rep = gamma_report({{1.0, 0.5, 1.3}, {0.2, -0.4, 2.0}}, expand(TransformSpec::identity()),
                                NoiseSpec::single(1.5), 20, GammaMode::as_printed);
  const auto text = rep.to_text();
  EXPECT_NE(text.find("mode = as-printed"), std::string::npos);
  EXPECT_NE(text.find("gamma_row3"), std::string::npos);
  const auto csv = rep.to_csv();
  EXPECT_EQ(csv.rows(), 18u);
  EXPECT_EQ(csv.column("value")[8], rep.blocks[0].gamma(2, 2));
  EXPECT_EQ(parse_gamma_mode("derived"), GammaMode::derived);
  EXPECT_EQ(code_of([] { parse_gamma_mode("other"); }), ErrorCode::validation);
}
