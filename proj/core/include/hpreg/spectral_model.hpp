#pragma once

#include <string>
#include <vector>

#include "hpreg/config.hpp"

namespace hpreg {

/// One term D * cos(kappa t) / (1 + |t|^rho)^(alpha / 2) of the covariance
/// mixture. rho == 2 is the closed-form (Bessel-K) family.
struct NoiseComponent {
  double weight = 1.0;   // D
  double decay = 1.0;    // alpha
  double carrier = 0.0;  // kappa, radians per unit time
  double shape = 2.0;    // rho in (0, 2]

  bool has_closed_form() const noexcept { return shape == 2.0; }
};

/// Covariance mixture of the underlying unit-variance Gaussian process.
/// Weights sum to one and carriers are strictly increasing.
class NoiseSpec {
 public:
  explicit NoiseSpec(std::vector<NoiseComponent> components);

  /// D = 1 single component.
  static NoiseSpec single(double alpha, double kappa = 0.0, double rho = 2.0);

  const std::vector<NoiseComponent>& components() const noexcept { return components_; }
  double min_decay() const noexcept { return min_decay_; }
  bool has_closed_form() const noexcept;

  static NoiseSpec from_config(const ConfigDocument& doc);
  std::string to_config() const;

 private:
  std::vector<NoiseComponent> components_;
  double min_decay_;
};

/// Modified Bessel function of the third kind K_nu(z), z > 0, evaluated from
/// K_nu(z) = \int_0^inf cosh(nu u) exp(-z cosh u) du by tanh-sinh quadrature.
/// Throws domain for z <= 0 or |nu| > 50, overflow when the result exceeds
/// the double range.
double bessel_k(double nu, double z);

/// c1(alpha) = 2^((1 - alpha)/2) / (sqrt(pi) Gamma(alpha / 2)).
double spectral_constant_c1(double alpha);

/// c2(alpha) = [2 Gamma(alpha) cos(alpha pi / 2)]^-1, the leading coefficient
/// of |lambda -+ kappa|^(alpha - 1) near a singular point (0 < alpha < 1).
double spectral_constant_c2(double alpha);

/// Covariance of a single mixture component at lag t (weight excluded).
double component_covariance(const NoiseComponent& c, double t);

double covariance(const NoiseSpec& spec, double t);

/// Covariance with every cosine replaced by one; bounds |B(t)|.
double covariance_envelope(const NoiseSpec& spec, double t);

/// Spectral density of one component (weight excluded). Closed form for
/// rho == 2, numerical cosine transform otherwise.
double component_density(const NoiseComponent& c, double lambda);

/// f(lambda) = sum_j D_j f_j(lambda), normalized so that B(t) = \int e^{i lambda t} f.
/// Throws singularity when lambda hits +-kappa_j of a component with alpha_j <= 1.
double spectral_density(const NoiseSpec& spec, double lambda);

struct SingularPoint {
  double frequency;
  double severity;   // alpha of the owning component
  bool logarithmic;  // alpha == 1
};

/// Points +-kappa_j where f is unbounded (alpha_j < 1 power law, alpha_j == 1
/// logarithmic), ascending and deduplicated.
std::vector<SingularPoint> singular_points(const NoiseSpec& spec);

/// \int_lo^hi f. Pass +-infinity for the full line. The domain is split at
/// every carrier and each piece adjacent to a singular point is integrated
/// after the substitution lambda = kappa + s^(1/alpha), which removes the
/// |lambda - kappa|^(alpha - 1) singularity.
double integrate_spectral_density(const NoiseSpec& spec, double lo, double hi);

}  // namespace hpreg
