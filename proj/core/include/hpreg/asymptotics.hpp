#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "hpreg/csv.hpp"
#include "hpreg/estimator.hpp"
#include "hpreg/simulate.hpp"
#include "hpreg/spectral_model.hpp"
#include "hpreg/subordination.hpp"

namespace hpreg {

struct ConvolutionValue {
  double value = 0.0;
  double error = 0.0;  // summed quadrature error estimates
};

/// k-fold convolution f^{(*k)}(lambda) = (1/2pi) \int B(t)^k cos(lambda t) dt.
/// B^k is expanded into envelope products times cosines of combined carriers,
/// and each piece is a one-sided cosine transform of a monotone envelope.
/// Throws non_integrable when min_decay * k <= 1. Results are memoized.
ConvolutionValue self_convolution(const NoiseSpec& spec, int k, double lambda);

/// \int_a^inf |B(t)|^m dt. Exact quadrature of B^m when every carrier is
/// zero; otherwise quadrature over a finite window plus the envelope tail,
/// which can only overestimate.
double covariance_power_tail(const NoiseSpec& spec, int m, double a);

/// B_m = \int_R |B(t)|^m dt.
double covariance_power_integral(const NoiseSpec& spec, int m);

/// Limit Gram matrix of (d/dA, d/dB, d/dphi) g for one harmonic, with unit
/// diagonal, (1,3) = sqrt(3) B / (2C), (2,3) = -sqrt(3) A / (2C), C^2 = A^2 + B^2.
struct GramBlock {
  Eigen::Matrix3d gram;
  /// Maps d_T normalization to (sqrt T, sqrt T, T^{3/2}) normalization:
  /// (sqrt(1/2), sqrt(1/2), sqrt(C^2 / 6)).
  Eigen::Vector3d scalers;
};

GramBlock gram_block(double a, double b);

enum class GammaMode { derived, as_printed };

std::string to_string(GammaMode mode);
GammaMode parse_gamma_mode(std::string_view text);

inline constexpr int kDefaultTruncation = 20;

/// s = sum_{j=m}^{J} C_j^2 / j! f^{(*j)}(phi) with the truncation bound
/// (1/2pi) B_m sum_{j>J} C_j^2 / j!.
struct SpectralFactor {
  double value = 0.0;
  double quadrature_error = 0.0;
  int rank = 1;
  int truncation = kDefaultTruncation;
  double tail_bound = 0.0;
};

SpectralFactor spectral_factor(const HermiteExpansion& g, const NoiseSpec& spec, double phi,
                               int truncation = kDefaultTruncation);

/// Limit covariance block for one harmonic given its spectral factor.
/// derived: D (2 pi s J^{-1}) D with D = diag(sqrt 2, sqrt 2, sqrt 6 / C).
/// as_printed: 4 pi s / C^2 [[C^2, -3AB, -6B], [-3AB, C^2, 6A], [-6B, 6A, 12]].
Eigen::Matrix3d gamma_block(double a, double b, double s, GammaMode mode);

Eigen::Matrix3d gamma_matrix(double a, double b, double phi, const HermiteExpansion& g, const NoiseSpec& spec,
                             int truncation = kDefaultTruncation, GammaMode mode = GammaMode::derived);

/// Point mass of a matrix-valued spectral measure.
struct SpectralAtom {
  double location = 0.0;
  Eigen::MatrixXcd mass;
};

/// The two atoms at +-phi of the trigonometric regression measure, whose
/// masses sum to the Gram block.
std::vector<SpectralAtom> trigonometric_atoms(double a, double b, double phi);

struct SigmaPair {
  Eigen::MatrixXd sigma;   // 2 pi sum_k C_k^2/k! \int f^{(*k)} dmu
  Eigen::MatrixXd sigma0;  // (\int mu)^{-1} sigma (\int mu)^{-1}
};

/// Throws overlap when an atom sits on a noise singular point, singular_system
/// when the total mass is not invertible, validation on shape mismatch.
SigmaPair sigma_general(const HermiteExpansion& g, const NoiseSpec& spec, const std::vector<SpectralAtom>& atoms,
                        int truncation = kDefaultTruncation);

struct GammaBlockReport {
  Harmonic harmonic;
  Eigen::Matrix3d gamma;
  Eigen::Vector3d eigenvalues;  // ascending
  SpectralFactor factor;
};

struct GammaReport {
  GammaMode mode = GammaMode::derived;
  int truncation = kDefaultTruncation;
  std::vector<GammaBlockReport> blocks;

  std::string to_text() const;
  /// One row per block entry: harmonic,row,col,value.
  CsvTable to_csv() const;
};

GammaReport gamma_report(const std::vector<Harmonic>& harmonics, const HermiteExpansion& g, const NoiseSpec& spec,
                         int truncation = kDefaultTruncation, GammaMode mode = GammaMode::derived);

/// Gamma evaluated at the estimated parameters.
GammaReport plug_in_gamma(const EstimationResult& result, const HermiteExpansion& g, const NoiseSpec& spec,
                          int truncation = kDefaultTruncation, GammaMode mode = GammaMode::derived);

/// Right-hand side of the perturbation bound
/// |f^{(*j)}(phi_hat) - f^{(*j)}(phi)| <= (B_m / 2pi) T |phi_hat - phi| + (2/T) \int_T^inf |B|^m.
double plug_in_perturbation_bound(const NoiseSpec& spec, int m, double horizon, double phi_hat, double phi);

}  // namespace hpreg
