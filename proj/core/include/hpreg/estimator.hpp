#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hpreg/simulate.hpp"

namespace hpreg {

/// Minimum frequency spacing and minimum first frequency, both c / sqrt(T).
struct SeparationPolicy {
  double constant = 1.0;

  double min_gap(double horizon) const;
  double min_first(double horizon) const;
};

/// Q_T(tau) = (1/T) sum_i [x(t_i) - g(t_i, tau)]^2 step.
double objective(const SamplePath& x, const std::vector<Harmonic>& params);

/// |(step/T) sum_i x(t_i) exp(-i lambda t_i)|^2 by direct summation.
/// Throws domain unless 0 < lambda < pi / step.
double periodogram(const SamplePath& x, double lambda);

/// Periodogram at the Fourier frequencies 2 pi k / T, k = 0..n-1.
std::vector<double> periodogram_fourier_grid(const SamplePath& x);

struct FrequencyDetection {
  std::vector<double> frequencies;  // ascending
  std::vector<double> peak_values;  // periodogram at each pick, in pick order
  double grid_spacing = 0.0;
  double noise_floor = 0.0;         // 4 x median periodogram over the band
  bool below_noise_floor = false;   // strongest peak did not clear the floor
};

/// Iterative peak picking on a zero-padded FFT periodogram with spacing
/// <= pi / (4T), each pick refined by golden-section search to 1e-3 / T.
/// Candidates within min_gap of an earlier pick, below min_first, or under
/// the sinc^2 leakage envelope of an earlier pick are inadmissible. Throws
/// insufficient_peaks when a pick after the first cannot clear the floor.
FrequencyDetection detect_frequencies(const SamplePath& x, std::size_t n_harmonics, double band_low,
                                      double band_high, const SeparationPolicy& policy = {});

struct AmplitudeSolve {
  std::vector<Harmonic> harmonics;
  bool decoupled = false;  // Gram matrix ill-conditioned, used A = 2 c1, B = 2 c2
};

/// Least-squares (A_k, B_k) for fixed frequencies from the 2N x 2N normal
/// equations with <u, v> = (step/T) sum u v. Throws singular_system when the
/// Gram matrix is numerically singular.
AmplitudeSolve amplitudes_given_frequencies(const SamplePath& x, const std::vector<double>& frequencies);

struct EstimationResult {
  std::vector<Harmonic> estimate;
  double objective = 0.0;
  double initial_objective = 0.0;  // before refinement
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  // with the frequency derivative scaled by 1/T
  double grid_resolution = 0.0;
  bool decoupled_amplitudes = false;
  std::vector<std::string> warnings;
  /// Per harmonic (sqrt(T) dA, sqrt(T) dB, T^{3/2} dphi) when truth is known.
  std::vector<std::array<double, 3>> normalized_errors;
};

/// Gauss-Newton with step halving on Q_T over all 3N parameters, from
/// theta0, until the scaled gradient norm is below 1e-10, the predicted
/// decrease falls under the rounding level of Q, or 100 iterations.
/// Steps leaving the band or breaking the separation policy are halved.
EstimationResult refine(const SamplePath& x, const std::vector<Harmonic>& theta0, double band_low,
                        double band_high, const SeparationPolicy& policy = {});

/// Detection, amplitude solve and refinement.
EstimationResult estimate(const SamplePath& x, std::size_t n_harmonics, double band_low, double band_high,
                          const SeparationPolicy& policy = {});

/// Fills result.normalized_errors against a truth with the same N.
void attach_normalized_errors(EstimationResult& result, const HarmonicModel& truth, double horizon);

/// z = sin(T d) / (T d), y = (1 - cos(T d)) / (T d) for d = phi_hat - phi.
std::array<double, 2> walker_ratios(double phi_hat, double phi, double horizon);

}  // namespace hpreg
