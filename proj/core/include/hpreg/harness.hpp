#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hpreg/asymptotics.hpp"
#include "hpreg/estimator.hpp"
#include "hpreg/simulate.hpp"

namespace hpreg {

/// Monte Carlo experiment. Config file keys (root section):
///   model, noise, transform   paths to their own config files, relative to
///                             the experiment file
///   horizons = T1, T2, ...    step = 0.25
///   replications, seed, mode (derived|as-printed), truncation,
///   time_offset (shifts the time origin of the signal), noiseless,
///   allow_weak_dependence_violation
struct ExperimentConfig {
  NoiseSpec noise = NoiseSpec::single(1.5);
  TransformSpec transform = TransformSpec::identity();
  HarmonicModel model;
  std::vector<SamplingGrid> grids;
  int replications = 2;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir;
  GammaMode mode = GammaMode::derived;
  int truncation = kDefaultTruncation;
  double time_offset = 0.0;
  bool noiseless = false;
  bool allow_weak_dependence_violation = false;

  static ExperimentConfig from_config(const ConfigDocument& doc, const std::filesystem::path& base_dir = ".");
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Throws validation (R < 2, empty schedule, N = 0, Nyquist) or
  /// non_integrable (alpha_min * m <= 1 without the override).
  void validate() const;
};

/// seed for replication r: splitmix64 of the master seed mixed with r.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t replication);

/// Signal g(t + t0) written as a model in t.
HarmonicModel shift_time_origin(const HarmonicModel& model, double t0);

struct ReplicationOutcome {
  bool failed = false;
  std::string failure;
  bool converged = false;
  std::vector<double> normalized;  // (sqrt T dA, sqrt T dB, T^{3/2} dphi) per harmonic
  std::vector<double> raw;         // (dA, dB, dphi) per harmonic
  std::vector<Harmonic> estimate;
  Eigen::MatrixXd plug_in_gamma;   // derived mode at the estimate, block diagonal
  bool bound_holds = true;         // plug-in perturbation bound for every used order
  double eta2 = 0.0;               // eta(T)^2 of the noise component
};

struct Coverage {
  std::array<double, 3> levels{0.90, 0.95, 0.99};
  Eigen::MatrixXd rates;  // components x levels
};

struct NormalitySummary {
  Eigen::VectorXd skewness, skewness_se, excess_kurtosis, kurtosis_se;
  Coverage coverage;
};

/// Standardized skewness and excess kurtosis with their large-sample standard
/// errors, and coverage of nominal 90/95/99% intervals +- z sqrt(Gamma_ii)
/// around zero. Throws insufficient_samples below 100 rows and degenerate for
/// a constant column.
NormalitySummary normality_diagnostics(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& gamma);

struct HorizonSummary {
  SamplingGrid grid;
  int requested = 0;
  int failed = 0;
  int non_converged = 0;
  int used = 0;
  std::vector<std::string> failures;  // "r: message"
  Eigen::MatrixXd samples;            // used x 3N normalized errors, replication order
  std::vector<int> sample_index;      // replication index of each sample row
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd gamma_derived;
  Eigen::MatrixXd gamma_printed;
  Eigen::MatrixXd relative_deviation_derived;  // (empirical - Gamma) / |Gamma|
  Eigen::MatrixXd relative_deviation_printed;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> significant;  // |Gamma_ij| > 0.05 ||Gamma||_2 (derived)
  Eigen::VectorXd coverage95;
  Eigen::MatrixXd plug_in_median_deviation;  // per entry, median over replications
  int bound_violations = 0;
  double median_abs_amplitude_error = 0.0;
  double median_abs_frequency_error = 0.0;
  double mean_eta2 = 0.0;
};

struct SlopeTable {
  std::vector<double> horizons;
  std::vector<double> amplitude_medians;
  std::vector<double> frequency_medians;
  double amplitude_slope = 0.0;
  double frequency_slope = 0.0;
  bool amplitude_floor_limited = false;  // slope reported as -inf
  bool frequency_floor_limited = false;
};

struct MonteCarloReport {
  ExperimentConfig config;
  std::vector<HorizonSummary> horizons;
  SlopeTable slopes;  // filled when the schedule has >= 3 horizons
  bool eta2_decreasing = true;
  double seconds = 0.0;  // runtime metadata, not part of to_text()

  /// Deterministic summary text (identical for identical config and seed).
  std::string to_text() const;
  /// report.txt, samples_<i>.csv per horizon and runtime.txt.
  void write(const std::filesystem::path& dir) const;
};

/// Simulate, estimate and normalize R replications per horizon on a pool of
/// `workers` threads. Per-replication failures are recorded; more than 20%
/// failed or non-converged replications at any horizon throws
/// experiment_failure.
MonteCarloReport run_replications(const ExperimentConfig& config, int workers = 1);

/// Log-log slopes of median absolute errors against T. Needs >= 3 horizons.
SlopeTable consistency_sweep(const std::vector<HorizonSummary>& horizons);
SlopeTable consistency_sweep(const ExperimentConfig& config, int workers = 1);

/// Mean eta(T)^2 over R pure-noise paths at each grid.
std::vector<double> eta_decay(const NoiseSpec& noise, const TransformSpec& transform,
                              const std::vector<SamplingGrid>& grids, int replications, std::uint64_t master_seed,
                              int workers = 1);

/// Block-diagonal Gamma over the harmonics of a model.
Eigen::MatrixXd block_gamma(const GammaReport& report);

}  // namespace hpreg
