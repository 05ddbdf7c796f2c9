#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpreg/config.hpp"
#include "hpreg/csv.hpp"
#include "hpreg/spectral_model.hpp"
#include "hpreg/subordination.hpp"

namespace hpreg {

/// Uniform observation times t_i = i * step, i = 0..count-1, covering
/// [0, horizon) with horizon = count * step.
struct SamplingGrid {
  double horizon = 0.0;
  double step = 0.0;
  std::size_t count = 0;

  /// count = round(horizon / step); throws validation unless count * step
  /// reproduces horizon to 1e-12 relative.
  static SamplingGrid make(double horizon, double step);
  /// Keys `horizon` and `step` (default 0.25) of the root section.
  static SamplingGrid from_config(const ConfigSection& section);

  double time(std::size_t i) const noexcept { return static_cast<double>(i) * step; }
  double nyquist() const noexcept;
};

struct Harmonic {
  double a = 0.0;
  double b = 0.0;
  double frequency = 0.0;
};

/// g(t) = sum_k A_k cos(phi_k t) + B_k sin(phi_k t) with band_low < phi_1 <
/// ... < phi_N < band_high and A_k^2 + B_k^2 > 0. N = 0 is the
/// zero-amplitude (pure noise) model.
class HarmonicModel {
 public:
  HarmonicModel() = default;
  HarmonicModel(std::vector<Harmonic> harmonics, double band_low = 0.1, double band_high = 3.0);

  /// Root key `band = lo, hi`; one `[harmonic]` block per term with keys A, B, phi.
  static HarmonicModel from_config(const ConfigDocument& doc);
  std::string to_config() const;

  const std::vector<Harmonic>& harmonics() const noexcept { return harmonics_; }
  std::size_t size() const noexcept { return harmonics_.size(); }
  double band_low() const noexcept { return band_low_; }
  double band_high() const noexcept { return band_high_; }

  double operator()(double t) const;

 private:
  std::vector<Harmonic> harmonics_;
  double band_low_ = 0.1;
  double band_high_ = 3.0;
};

/// Circulant embedding of the covariance of xi on a grid. The circle length
/// starts at the smallest power of two >= 2(n - 1) and doubles up to 16
/// times that while eigenvalues below -1e-8 remain; eigenvalues in
/// [-1e-8, 0) are set to zero. With `approximate`, a still-indefinite
/// embedding is accepted by zeroing its negative eigenvalues.
class CirculantEmbedding {
 public:
  CirculantEmbedding(const NoiseSpec& spec, const SamplingGrid& grid, bool approximate = false);

  /// Stationary Gaussian samples xi(t_0..t_{n-1}); deterministic per seed.
  std::vector<double> sample(std::uint64_t seed) const;

  std::size_t circle_length() const noexcept { return eigenvalues_.size(); }
  /// Sum of |negative eigenvalues| that were zeroed, over the total.
  double discarded_fraction() const noexcept { return discarded_fraction_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::size_t n_;
  std::vector<double> scale_;  // sqrt(lambda_k / M)
  std::vector<double> eigenvalues_;
  double discarded_fraction_ = 0.0;
  double min_eigenvalue_ = 0.0;
  std::vector<std::string> warnings_;
};

std::vector<double> gaussian_path(const NoiseSpec& spec, const SamplingGrid& grid, std::uint64_t seed,
                                  bool approximate = false);

std::vector<double> subordinate(const std::vector<double>& xi, const TransformSpec& transform);

/// g(t_i); throws nyquist if the band reaches pi / step.
std::vector<double> regression_signal(const HarmonicModel& model, const SamplingGrid& grid);

struct SamplePath {
  SamplingGrid grid;
  std::vector<double> values;
  std::vector<double> signal;  // empty unless retained
  std::vector<double> noise;   // empty unless retained
  std::vector<std::string> warnings;

  double time(std::size_t i) const noexcept { return grid.time(i); }

  /// Columns t, x and, when retained, signal, noise.
  CsvTable to_csv() const;
  /// Requires columns t, x on a uniform grid starting at 0.
  static SamplePath from_csv(const CsvTable& table);
};

struct ObserveOptions {
  bool allow_weak_dependence_violation = false;  // downgrade the alpha_min * m > 1 check to a warning
  bool keep_components = true;
  bool approximate_embedding = false;
};

/// Reusable observation pipeline: embedding, Hermite rank and signal are
/// computed once, paths are drawn per seed.
class Simulator {
 public:
  Simulator(HarmonicModel model, NoiseSpec spec, TransformSpec transform, SamplingGrid grid,
            ObserveOptions options = {});

  SamplePath observe(std::uint64_t seed) const;
  /// epsilon = G(xi) only.
  std::vector<double> noise(std::uint64_t seed) const;

  const SamplingGrid& grid() const noexcept { return grid_; }
  const HarmonicModel& model() const noexcept { return model_; }
  int rank() const noexcept { return rank_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  HarmonicModel model_;
  NoiseSpec spec_;
  TransformSpec transform_;
  SamplingGrid grid_;
  ObserveOptions options_;
  CirculantEmbedding embedding_;
  std::vector<double> signal_;
  int rank_ = 1;
  std::vector<std::string> warnings_;
};

SamplePath observe(const HarmonicModel& model, const NoiseSpec& spec, const TransformSpec& transform,
                   const SamplingGrid& grid, std::uint64_t seed, const ObserveOptions& options = {});

/// eta(T) = sup_lambda (1/T) |sum_i x(t_i) exp(-i lambda t_i) step| over
/// [0, pi/step], on a zero-padded FFT grid eight times finer than 2 pi / T.
double fourier_sup(const std::vector<double>& values, const SamplingGrid& grid);

}  // namespace hpreg
