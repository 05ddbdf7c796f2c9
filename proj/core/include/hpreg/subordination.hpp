#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hpreg/config.hpp"
#include "hpreg/spectral_model.hpp"

namespace hpreg {

inline constexpr int kMaxHermiteOrder = 60;

/// Probabilists' Hermite polynomial H_k(x), by H_{k+1} = x H_k - k H_{k-1}.
/// Throws overflow for k > 60.
double hermite(int k, double x);

/// H_0(x) .. H_kmax(x) in one recurrence pass.
std::vector<double> hermite_all(int kmax, double x);

/// n-point Gauss-Hermite rule for the standard normal weight (weights sum to
/// one), from the eigen-decomposition of the Jacobi matrix.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadratureRule& gauss_hermite(int n);

enum class TransformKind { identity, hermite, centered_abs, cube, table };

/// Pointwise transform G of the Gaussian process, epsilon(t) = G(xi(t)).
/// Kinds: identity; hermite (explicit C_k, G = sum C_k H_k / k!);
/// centered_abs (|x| - sqrt(2/pi)); cube (x^3); table (piecewise linear
/// through user (x, G(x)) points, linearly extrapolated).
class TransformSpec {
 public:
  static TransformSpec identity();
  static TransformSpec hermite(std::vector<double> coeffs);
  static TransformSpec centered_abs();
  static TransformSpec cube();
  static TransformSpec table(std::vector<double> xs, std::vector<double> gs);

  /// Keys: kind, coeffs (hermite), table (csv path with columns x,G; relative
  /// paths resolve against base_dir), kmax.
  static TransformSpec from_config(const ConfigDocument& doc,
                                   const std::filesystem::path& base_dir = {});
  std::string to_config() const;

  TransformKind kind() const noexcept { return kind_; }
  const std::vector<double>& explicit_coeffs() const noexcept { return coeffs_; }
  const std::vector<double>& table_x() const noexcept { return xs_; }
  const std::vector<double>& table_g() const noexcept { return gs_; }
  int kmax() const noexcept { return kmax_; }
  TransformSpec& set_kmax(int kmax);

  /// Polynomial kinds, for which Gauss-Hermite quadrature is exact.
  bool is_polynomial() const noexcept;
  /// Points where G is not smooth.
  std::vector<double> breakpoints() const;

  double operator()(double x) const;

 private:
  TransformKind kind_ = TransformKind::identity;
  std::vector<double> coeffs_;
  std::vector<double> xs_;
  std::vector<double> gs_;
  std::string table_path_;
  int kmax_ = 20;
};

std::string to_string(TransformKind kind);

/// E h(xi) for standard normal xi. Gauss-Hermite for polynomial transforms;
/// otherwise composite Gauss-Legendre panels split at the breakpoints.
double gaussian_expectation(const TransformSpec& g, int power);

/// C_k = E[G(xi) H_k(xi)], k = 0..kmax. Node counts double until no
/// C_k / sqrt(k!) moves by more than 1e-9. Throws mean_nonzero if
/// |C_0| > 1e-8, nonconvergence if the doubling schedule is exhausted.
std::vector<double> hermite_coefficients(const TransformSpec& g, int kmax);

/// Smallest k >= 1 with |C_k| / sqrt(k!) > tol. Throws degenerate when none.
int hermite_rank(const std::vector<double>& coeffs, double tol = 1e-8);

/// Coefficients plus the diagnostics every result reports.
struct HermiteExpansion {
  std::vector<double> coeffs;
  int rank = 1;
  double second_moment = 0.0;  // E G^2 by quadrature
  double fourth_moment = 0.0;  // E G^4 by quadrature
  double partial_sum = 0.0;    // sum_{k <= kmax} C_k^2 / k!
  double tail() const noexcept { return second_moment - partial_sum; }
};

HermiteExpansion expand(const TransformSpec& g);

/// sum_{k=m}^{kmax} C_k^2 / k! * b^k for a Gaussian correlation b.
double subordinated_covariance_at(const std::vector<double>& coeffs, double b);

double subordinated_covariance(const std::vector<double>& coeffs, const NoiseSpec& spec, double t);

}  // namespace hpreg
