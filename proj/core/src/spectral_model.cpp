#include "hpreg/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hpreg/errors.hpp"
#include "hpreg/quadrature.hpp"

namespace hpreg {
namespace {

constexpr double kPi = std::numbers::pi;

// Tail exponent of a component: |B_j(t)| ~ |t|^-(alpha rho / 2).
double memory_exponent(const NoiseComponent& c) { return c.decay * c.shape / 2.0; }

double log_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
}

// lim_{z->0} z^nu K_nu(z) for nu > 0.
double scaled_bessel_at_zero(double nu) { return std::tgamma(nu) * std::pow(2.0, nu - 1.0); }

// z^nu K_nu(z), continuous at z = 0 when nu > 0.
double scaled_bessel(double nu, double z) {
  if (z == 0.0) {
    if (nu > 0.0) return scaled_bessel_at_zero(nu);
    return std::numeric_limits<double>::infinity();
  }
  return std::pow(z, nu) * bessel_k(nu, z);
}

void validate_component(const NoiseComponent& c, std::size_t index) {
  const auto where = "noise component " + std::to_string(index);
  if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
    fail(ErrorCode::validation, where + ": weight D must be >= 0");
  }
  if (!(c.decay > 0.0) || !std::isfinite(c.decay)) {
    fail(ErrorCode::validation, where + ": decay alpha must be > 0");
  }
  if (!(c.shape > 0.0 && c.shape <= 2.0)) {
    fail(ErrorCode::validation, where + ": shape rho must lie in (0, 2]");
  }
  if (!(c.carrier >= 0.0) || !std::isfinite(c.carrier)) {
    fail(ErrorCode::validation, where + ": carrier kappa must be >= 0");
  }
}

}  // namespace

NoiseSpec::NoiseSpec(std::vector<NoiseComponent> components)
    : components_(std::move(components)), min_decay_(std::numeric_limits<double>::infinity()) {
  if (components_.empty()) fail(ErrorCode::validation, "noise spec needs at least one component");
  double total = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    validate_component(components_[j], j);
    if (j > 0 && !(components_[j].carrier > components_[j - 1].carrier)) {
      fail(ErrorCode::validation, "noise carriers must be strictly increasing");
    }
    total += components_[j].weight;
    min_decay_ = std::min(min_decay_, memory_exponent(components_[j]));
  }
  if (std::abs(total - 1.0) > 1e-12) {
    fail(ErrorCode::validation, "noise weights must sum to 1 (got " + format_double(total) + ")");
  }
}

NoiseSpec NoiseSpec::single(double alpha, double kappa, double rho) {
  return NoiseSpec({NoiseComponent{1.0, alpha, kappa, rho}});
}

bool NoiseSpec::has_closed_form() const noexcept {
  return std::all_of(components_.begin(), components_.end(),
                     [](const NoiseComponent& c) { return c.has_closed_form(); });
}

NoiseSpec NoiseSpec::from_config(const ConfigDocument& doc) {
  std::vector<NoiseComponent> comps;
  for (const auto* block : doc.blocks("component")) {
    NoiseComponent c;
    c.weight = block->get_double("D");
    c.decay = block->get_double("alpha");
    c.carrier = block->get_double_or("kappa", 0.0);
    c.shape = block->get_double_or("rho", 2.0);
    comps.push_back(c);
  }
  if (comps.empty()) {
    fail(ErrorCode::validation, doc.origin() + ": no [component] blocks in noise spec");
  }
  return NoiseSpec(std::move(comps));
}

std::string NoiseSpec::to_config() const {
  std::ostringstream out;
  for (const auto& c : components_) {
    out << "[component]\n"
        << "D = " << format_double(c.weight) << "\n"
        << "alpha = " << format_double(c.decay) << "\n"
        << "kappa = " << format_double(c.carrier) << "\n"
        << "rho = " << format_double(c.shape) << "\n";
  }
  return out.str();
}

double bessel_k(double nu, double z) {
  if (!(z > 0.0) || !std::isfinite(z)) fail(ErrorCode::domain, "bessel_k: z must be positive");
  if (!(std::abs(nu) <= 50.0)) fail(ErrorCode::domain, "bessel_k: |nu| must not exceed 50");
  nu = std::abs(nu);

  auto log_integrand = [nu, z](double u) { return -z * std::cosh(u) + log_cosh(nu * u); };

  // Peak of the integrand: nu tanh(nu u) = z sinh(u).
  double peak = 0.0;
  if (nu * nu > z) {
    double lo = 0.0;
    double hi = std::asinh(nu / z) + 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (nu * std::tanh(nu * mid) > z * std::sinh(mid) ? lo : hi) = mid;
    }
    peak = 0.5 * (lo + hi);
  }
  const double log_peak = log_integrand(peak);

  double width = 1.0;
  while (log_integrand(peak + width) - log_peak > -60.0) width *= 2.0;
  const double upper = peak + width;

  auto scaled = [&](double u) { return std::exp(log_integrand(u) - log_peak); };

  // The exp(-z cosh u) cutoff for tiny z sits well beyond the peak.
  std::vector<double> cuts{0.0, peak};
  if (z < 1.0) {
    const double knee = std::acosh(1.0 / z);
    if (knee > peak && knee < upper) cuts.push_back(knee);
  }
  cuts.push_back(upper);

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) integral += quad::finite(scaled, cuts[i], cuts[i + 1], 1e-14).value;
  }

  const double log_value = log_peak + std::log(integral);
  if (log_value > std::log(std::numeric_limits<double>::max())) {
    fail(ErrorCode::overflow, "bessel_k: result exceeds the double range");
  }
  return std::exp(log_value);
}

double spectral_constant_c1(double alpha) {
  return std::pow(2.0, (1.0 - alpha) / 2.0) / (std::sqrt(kPi) * std::tgamma(alpha / 2.0));
}

double spectral_constant_c2(double alpha) {
  return 1.0 / (2.0 * std::tgamma(alpha) * std::cos(alpha * kPi / 2.0));
}

double component_covariance(const NoiseComponent& c, double t) {
  const double at = std::abs(t);
  const double base = c.has_closed_form() ? 1.0 + at * at : 1.0 + std::pow(at, c.shape);
  return std::cos(c.carrier * t) * std::pow(base, -c.decay / 2.0);
}

double covariance(const NoiseSpec& spec, double t) {
  double sum = 0.0;
  for (const auto& c : spec.components()) sum += c.weight * component_covariance(c, t);
  return sum;
}

double covariance_envelope(const NoiseSpec& spec, double t) {
  double sum = 0.0;
  for (const auto& c : spec.components()) {
    NoiseComponent flat = c;
    flat.carrier = 0.0;
    sum += c.weight * component_covariance(flat, t);
  }
  return sum;
}

double component_density(const NoiseComponent& c, double lambda) {
  const double exponent = memory_exponent(c);
  const double d_minus = std::abs(lambda - c.carrier);
  const double d_plus = std::abs(lambda + c.carrier);
  if (exponent <= 1.0 && (d_minus == 0.0 || d_plus == 0.0)) {
    fail(ErrorCode::singularity, "spectral density evaluated at a singular point");
  }

  if (c.has_closed_form()) {
    const double nu = (c.decay - 1.0) / 2.0;
    return spectral_constant_c1(c.decay) / 2.0 *
           (scaled_bessel(nu, d_plus) + scaled_bessel(nu, d_minus));
  }

  // (1/2pi) \int B_j(t) cos(lambda t) dt = (1/2pi) [G(lambda - kappa) + G(lambda + kappa)],
  // G(w) = \int_0^inf (1 + t^rho)^(-alpha/2) cos(w t) dt.
  NoiseComponent flat = c;
  flat.carrier = 0.0;
  auto envelope = [&flat](double t) { return component_covariance(flat, t); };
  const double g_minus = quad::cosine_transform(envelope, d_minus).value;
  const double g_plus = quad::cosine_transform(envelope, d_plus).value;
  return (g_minus + g_plus) / (2.0 * kPi);
}

double spectral_density(const NoiseSpec& spec, double lambda) {
  double sum = 0.0;
  for (const auto& c : spec.components()) {
    if (c.weight == 0.0) continue;
    sum += c.weight * component_density(c, lambda);
  }
  return sum;
}

std::vector<SingularPoint> singular_points(const NoiseSpec& spec) {
  std::vector<SingularPoint> out;
  for (const auto& c : spec.components()) {
    const double e = memory_exponent(c);
    if (e > 1.0) continue;
    const bool log_type = e == 1.0;
    out.push_back({-c.carrier, e, log_type});
    if (c.carrier != 0.0) out.push_back({c.carrier, e, log_type});
  }
  std::sort(out.begin(), out.end(),
            [](const SingularPoint& a, const SingularPoint& b) { return a.frequency < b.frequency; });
  return out;
}

namespace {

// \int_a^b f_c where a or b may be a singular point of exponent e < 1.
double integrate_piece(const NoiseComponent& c, double a, double b, bool singular_a,
                       bool singular_b, double exponent) {
  auto f = [&c](double x) { return component_density(c, x); };
  const bool power_law = exponent < 1.0;
  if (!power_law || (!singular_a && !singular_b)) {
    return quad::finite(f, a, b, 1e-12).value;
  }
  // Near a singular point p: lambda = p +- s^(1/e), dlambda = (1/e) s^(1/e - 1) ds.
  auto desingularized = [&](double p, double sign, double length) {
    const double inv = 1.0 / exponent;
    auto g = [&](double s) {
      if (s <= 0.0) return 0.0;
      const double x = p + sign * std::pow(s, inv);
      if (x == p) return 0.0;
      return f(x) * inv * std::pow(s, inv - 1.0);
    };
    return quad::finite(g, 0.0, std::pow(length, exponent), 1e-12).value;
  };
  if (singular_a && singular_b) {
    const double mid = 0.5 * (a + b);
    return desingularized(a, 1.0, mid - a) + desingularized(b, -1.0, b - mid);
  }
  if (singular_a) return desingularized(a, 1.0, b - a);
  return desingularized(b, -1.0, b - a);
}

double integrate_component(const NoiseComponent& c, double lo, double hi) {
  const double exponent = memory_exponent(c);
  const bool has_singularity = exponent <= 1.0;
  std::vector<double> cuts{lo};
  for (double p : {-c.carrier, 0.0, c.carrier}) {
    if (p > lo && p < hi && (cuts.empty() || p != cuts.back())) cuts.push_back(p);
  }
  cuts.push_back(hi);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto is_singular = [&](double x) {
    return has_singularity && (x == c.carrier || x == -c.carrier);
  };
  auto f = [&c](double x) { return component_density(c, x); };

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i];
    double b = cuts[i + 1];
    if (std::isinf(a) && std::isinf(b)) continue;
    if (std::isinf(b)) {
      // [a, inf): finite stretch off the singular point, then exp-sinh.
      const double knee = a + 1.0;
      total += integrate_piece(c, a, knee, is_singular(a), false, exponent);
      total += quad::half_line(f, knee, 1e-12).value;
    } else if (std::isinf(a)) {
      const double knee = b - 1.0;
      total += integrate_piece(c, knee, b, false, is_singular(b), exponent);
      total += quad::half_line([&f](double x) { return f(-x); }, -knee, 1e-12).value;
    } else {
      total += integrate_piece(c, a, b, is_singular(a), is_singular(b), exponent);
    }
  }
  return total;
}

}  // namespace

double integrate_spectral_density(const NoiseSpec& spec, double lo, double hi) {
  if (!(lo < hi)) fail(ErrorCode::domain, "integrate_spectral_density: need lo < hi");
  double total = 0.0;
  for (const auto& c : spec.components()) {
    if (c.weight == 0.0) continue;
    total += c.weight * integrate_component(c, lo, hi);
  }
  return total;
}

}  // namespace hpreg
