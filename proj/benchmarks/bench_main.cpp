#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "hpreg/asymptotics.hpp"
#include "hpreg/diagrams.hpp"
#include "hpreg/estimator.hpp"
#include "hpreg/simulate.hpp"
#include "hpreg/spectral_model.hpp"
#include "hpreg/subordination.hpp"

using namespace hpreg;

namespace {

void BM_BesselK(benchmark::State& state) {
  const double nu = static_cast<double>(state.range(0)) / 10.0;
  double z = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel_k(nu, z));
    z = z < 20.0 ? z * 1.01 : 0.05;
  }
}
BENCHMARK(BM_BesselK)->Arg(0)->Arg(3)->Arg(17);

void BM_SpectralDensityNumeric(benchmark::State& state) {
  const NoiseSpec spec({{1.0, 1.2, 0.8, 1.5}});
  double lambda = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_density(spec, lambda));
    lambda = lambda < 3.0 ? lambda + 0.013 : 0.01;
  }
}
BENCHMARK(BM_SpectralDensityNumeric);

void BM_CirculantSample(benchmark::State& state) {
  const auto grid = SamplingGrid::make(static_cast<double>(state.range(0)), 0.25);
  const CirculantEmbedding embedding(NoiseSpec::single(1.5), grid);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(embedding.sample(seed++));
  state.SetComplexityN(static_cast<std::int64_t>(grid.count));
}
BENCHMARK(BM_CirculantSample)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_CirculantSetup(benchmark::State& state) {
  const auto grid = SamplingGrid::make(static_cast<double>(state.range(0)), 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(CirculantEmbedding(NoiseSpec::single(1.5), grid).circle_length());
}
BENCHMARK(BM_CirculantSetup)->Arg(1024)->Arg(4096);

void BM_Estimate(benchmark::State& state) {
  const Simulator sim(HarmonicModel({{1.0, 0.5, 1.3}}), NoiseSpec::single(1.5), TransformSpec::identity(),
                      SamplingGrid::make(static_cast<double>(state.range(0)), 0.25));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    state.PauseTiming();
    const auto path = sim.observe(seed++);
    state.ResumeTiming();
    benchmark::DoNotOptimize(estimate(path, 1, 0.1, 3.0));
  }
}
BENCHMARK(BM_Estimate)->Arg(256)->Arg(1024)->Arg(4096);

void BM_DiagramCensus(benchmark::State& state) {
  const std::vector<int> orders(4, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(census(orders));
}
BENCHMARK(BM_DiagramCensus)->DenseRange(1, 4);

void BM_HermiteProductMoment(benchmark::State& state) {
  const std::vector<int> orders{2, 2, 3, 3};
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(4, 4, 0.3);
  c.diagonal().setOnes();
  for (auto _ : state) benchmark::DoNotOptimize(hermite_product_moment(orders, c));
}
BENCHMARK(BM_HermiteProductMoment);

void BM_SelfConvolution(benchmark::State& state) {
  // Results are memoized per frequency; step lambda so every call computes.
  const NoiseSpec spec({{0.6, 1.5, 0.0, 2.0}, {0.4, 1.5, 1.2, 2.0}});
  const int k = static_cast<int>(state.range(0));
  double lambda = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(self_convolution(spec, k, lambda));
    lambda += 1e-7;
  }
}
BENCHMARK(BM_SelfConvolution)->Arg(1)->Arg(2)->Arg(3)->Iterations(200);

void BM_GammaReport(benchmark::State& state) {
  const auto g = expand(TransformSpec::centered_abs());
  double phi = 1.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamma_report({{1.0, 0.5, phi}}, g, NoiseSpec::single(1.5), kDefaultTruncation,
                                          GammaMode::derived));
    phi += 1e-7;
  }
}
BENCHMARK(BM_GammaReport)->Iterations(20);

}  // namespace

BENCHMARK_MAIN();
