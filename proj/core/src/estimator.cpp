#include "hpreg/estimator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hpreg/errors.hpp"
#include "hpreg/fft.hpp"

namespace hpreg {
namespace {

constexpr double kFloorFactor = 4.0;
constexpr double kLeakageFactor = 16.0;
constexpr double kGradientTolerance = 1e-10;
constexpr double kStationaryRelative = 1e3 * std::numeric_limits<double>::epsilon();
constexpr int kMaxIterations = 100;
constexpr int kMaxHalvings = 40;
constexpr double kConditionLimit = 1e8;

double golden_section_max(const auto& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

double model_value(const std::vector<double>& theta, double t) {
  double g = 0.0;
  for (std::size_t k = 0; 3 * k < theta.size(); ++k) {
    const double phi = theta[3 * k + 2];
    g += theta[3 * k] * std::cos(phi * t) + theta[3 * k + 1] * std::sin(phi * t);
  }
  return g;
}

std::vector<double> pack(const std::vector<Harmonic>& hs) {
  std::vector<double> theta;
  for (const auto& h : hs) theta.insert(theta.end(), {h.a, h.b, h.frequency});
  return theta;
}

std::vector<Harmonic> unpack(const std::vector<double>& theta) {
  std::vector<Harmonic> hs;
  for (std::size_t k = 0; 3 * k < theta.size(); ++k) hs.push_back({theta[3 * k], theta[3 * k + 1], theta[3 * k + 2]});
  return hs;
}

double objective_packed(const SamplePath& x, const std::vector<double>& theta) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double r = x.values[i] - model_value(theta, x.time(i));
    sum += r * r;
  }
  return sum * x.grid.step / x.grid.horizon;
}

// Q_T(trial) - Q_T(theta) summed termwise as (g - g')(r' + r), which keeps
// the precision of small steps that a difference of two totals would lose.
double objective_change(const SamplePath& x, const std::vector<double>& theta, const std::vector<double>& trial) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double g = model_value(theta, x.time(i));
    const double g_trial = model_value(trial, x.time(i));
    sum += (g - g_trial) * ((x.values[i] - g_trial) + (x.values[i] - g));
  }
  return sum * x.grid.step / x.grid.horizon;
}

bool admissible(const std::vector<double>& theta, double lo, double hi, double gap, double first) {
  double previous = -1.0;
  for (std::size_t k = 0; 3 * k < theta.size(); ++k) {
    const double phi = theta[3 * k + 2];
    if (!(phi > lo && phi < hi && phi >= first)) return false;
    if (previous >= 0.0 && !(phi - previous >= gap)) return false;
    previous = phi;
  }
  return true;
}

}  // namespace

double SeparationPolicy::min_gap(double horizon) const { return constant / std::sqrt(horizon); }
double SeparationPolicy::min_first(double horizon) const { return constant / std::sqrt(horizon); }

double objective(const SamplePath& x, const std::vector<Harmonic>& params) {
  return objective_packed(x, pack(params));
}

double periodogram(const SamplePath& x, double lambda) {
  if (!(lambda > 0.0 && lambda < x.grid.nyquist())) {
    fail(ErrorCode::domain, "periodogram frequency outside (0, pi/step)");
  }
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double arg = lambda * x.time(i);
    re += x.values[i] * std::cos(arg);
    im -= x.values[i] * std::sin(arg);
  }
  const double scale = x.grid.step / x.grid.horizon;
  return scale * scale * (re * re + im * im);
}

std::vector<double> periodogram_fourier_grid(const SamplePath& x) {
  fft::ComplexVector data(x.values.begin(), x.values.end());
  fft::forward(data);
  const double scale = x.grid.step / x.grid.horizon;
  std::vector<double> out(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) out[k] = scale * scale * std::norm(data[k]);
  return out;
}

FrequencyDetection detect_frequencies(const SamplePath& x, std::size_t n_harmonics, double band_low,
                                      double band_high, const SeparationPolicy& policy) {
  if (n_harmonics < 1) fail(ErrorCode::validation, "need at least one harmonic");
  if (!(band_low >= 0.0 && band_high > band_low)) fail(ErrorCode::validation, "invalid band");
  if (!(band_high < x.grid.nyquist())) fail(ErrorCode::nyquist, "band reaches the Nyquist frequency");
  const double horizon = x.grid.horizon;
  const std::size_t m = fft::next_power_of_two(8 * x.values.size());
  const auto spectrum = fft::real_forward(x.values, m);
  const double spacing = 2.0 * std::numbers::pi / (static_cast<double>(m) * x.grid.step);
  const double scale = x.grid.step / horizon;

  std::vector<std::size_t> idx;
  std::vector<double> power(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    power[k] = scale * scale * std::norm(spectrum[k]);
    const double lambda = spacing * static_cast<double>(k);
    if (lambda > band_low && lambda < band_high) idx.push_back(k);
  }
  if (idx.size() < 3) fail(ErrorCode::validation, "band too narrow for the frequency grid");

  FrequencyDetection out;
  out.grid_spacing = spacing;
  {
    std::vector<double> in_band;
    for (auto k : idx) in_band.push_back(power[k]);
    auto mid = in_band.begin() + static_cast<std::ptrdiff_t>(in_band.size() / 2);
    std::nth_element(in_band.begin(), mid, in_band.end());
    out.noise_floor = kFloorFactor * *mid;
  }

  const double gap = policy.min_gap(horizon);
  const double first = policy.min_first(horizon);
  std::vector<double> picks;
  for (std::size_t j = 0; j < n_harmonics; ++j) {
    double best = -1.0;
    std::size_t best_k = 0;
    for (auto k : idx) {
      if (k == 0 || k + 1 >= power.size()) continue;
      if (power[k] < power[k - 1] || power[k] < power[k + 1]) continue;
      const double lambda = spacing * static_cast<double>(k);
      if (lambda < first) continue;
      bool ok = true;
      for (std::size_t p = 0; p < picks.size() && ok; ++p) {
        const double d = std::abs(lambda - picks[p]);
        const double envelope = 2.0 / (horizon * d);
        ok = d >= gap && power[k] > kLeakageFactor * out.peak_values[p] * envelope * envelope;
      }
      if (ok && power[k] > best) {
        best = power[k];
        best_k = k;
      }
    }
    if (best < 0.0) {
      fail(ErrorCode::insufficient_peaks, "only " + std::to_string(j) + " admissible periodogram peaks for " +
                                              std::to_string(n_harmonics) + " harmonics");
    }
    const double centre = spacing * static_cast<double>(best_k);
    const double lo = std::max(centre - spacing, std::max(band_low, first));
    const double hi = std::min(centre + spacing, band_high);
    const double refined =
        golden_section_max([&](double l) { return periodogram(x, l); }, lo, hi, 1e-3 / horizon);
    const double value = periodogram(x, refined);
    if (value < out.noise_floor) {
      if (j > 0) {
        fail(ErrorCode::insufficient_peaks, "peak " + std::to_string(j + 1) + " is below the noise floor");
      }
      out.below_noise_floor = true;
    }
    picks.push_back(refined);
    out.peak_values.push_back(value);
  }
  out.frequencies = picks;
  std::sort(out.frequencies.begin(), out.frequencies.end());
  return out;
}

AmplitudeSolve amplitudes_given_frequencies(const SamplePath& x, const std::vector<double>& frequencies) {
  const auto n = static_cast<Eigen::Index>(x.values.size());
  const auto q = static_cast<Eigen::Index>(2 * frequencies.size());
  Eigen::MatrixXd design(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = x.time(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
      design(i, static_cast<Eigen::Index>(2 * k)) = std::cos(frequencies[k] * t);
      design(i, static_cast<Eigen::Index>(2 * k + 1)) = std::sin(frequencies[k] * t);
    }
  }
  const double scale = x.grid.step / x.grid.horizon;
  const Eigen::Map<const Eigen::VectorXd> values(x.values.data(), n);
  const Eigen::MatrixXd gram = scale * design.transpose() * design;
  const Eigen::VectorXd rhs = scale * design.transpose() * values;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 1e-13 * lmax)) fail(ErrorCode::singular_system, "trigonometric Gram matrix is singular");
  AmplitudeSolve out;
  Eigen::VectorXd sol;
  if (lmax / lmin > kConditionLimit) {
    out.decoupled = true;
    sol = 2.0 * rhs;
  } else {
    sol = gram.ldlt().solve(rhs);
  }
  for (std::size_t k = 0; k < frequencies.size(); ++k) {
    out.harmonics.push_back(
        {sol(static_cast<Eigen::Index>(2 * k)), sol(static_cast<Eigen::Index>(2 * k + 1)), frequencies[k]});
  }
  return out;
}

EstimationResult refine(const SamplePath& x, const std::vector<Harmonic>& theta0, double band_low,
                        double band_high, const SeparationPolicy& policy) {
  const double horizon = x.grid.horizon;
  const double scale = x.grid.step / horizon;
  const double gap = policy.min_gap(horizon);
  const double first = policy.min_first(horizon);
  auto theta = pack(theta0);
  const auto n = static_cast<Eigen::Index>(x.values.size());
  const auto q = static_cast<Eigen::Index>(theta.size());

  EstimationResult out;
  double q_current = objective_packed(x, theta);
  out.initial_objective = q_current;
  Eigen::MatrixXd jac(n, q);
  Eigen::VectorXd resid(n);
  for (int iter = 0;; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = x.time(static_cast<std::size_t>(i));
      double g = 0.0;
      for (Eigen::Index k = 0; 3 * k < q; ++k) {
        const double a = theta[3 * k];
        const double b = theta[3 * k + 1];
        const double c = std::cos(theta[3 * k + 2] * t);
        const double s = std::sin(theta[3 * k + 2] * t);
        g += a * c + b * s;
        jac(i, 3 * k) = c;
        jac(i, 3 * k + 1) = s;
        jac(i, 3 * k + 2) = t * (b * c - a * s);
      }
      resid(i) = x.values[static_cast<std::size_t>(i)] - g;
    }
    const Eigen::VectorXd jtr = jac.transpose() * resid;
    Eigen::VectorXd grad = -2.0 * scale * jtr;
    for (Eigen::Index k = 2; k < q; k += 3) grad(k) /= horizon;
    out.gradient_norm = grad.norm();
    out.iterations = iter;
    if (out.gradient_norm < kGradientTolerance) {
      out.converged = true;
      break;
    }
    if (iter == kMaxIterations) break;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd step = jtj.ldlt().solve(jtr);
    if (!step.allFinite()) break;
    // Gauss-Newton predicted decrease; below rounding of Q the point is stationary.
    const double predicted = scale * jtr.dot(step);
    if (predicted <= kStationaryRelative * q_current) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    double s = 1.0;
    for (int h = 0; h < kMaxHalvings; ++h, s *= 0.5) {
      auto trial = theta;
      for (Eigen::Index k = 0; k < q; ++k) trial[k] += s * step(k);
      if (!admissible(trial, band_low, band_high, gap, first)) continue;
      if (objective_change(x, theta, trial) < 0.0) {
        theta = std::move(trial);
        q_current = objective_packed(x, theta);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no descent left at working precision
  }
  out.estimate = unpack(theta);
  out.objective = q_current;
  return out;
}

EstimationResult estimate(const SamplePath& x, std::size_t n_harmonics, double band_low, double band_high,
                          const SeparationPolicy& policy) {
  const auto detection = detect_frequencies(x, n_harmonics, band_low, band_high, policy);
  const auto amplitudes = amplitudes_given_frequencies(x, detection.frequencies);
  auto result = refine(x, amplitudes.harmonics, band_low, band_high, policy);
  result.grid_resolution = detection.grid_spacing;
  result.decoupled_amplitudes = amplitudes.decoupled;
  if (detection.below_noise_floor) {
    result.warnings.push_back("strongest periodogram peak is below 4x the median (noise floor)");
  }
  if (amplitudes.decoupled) result.warnings.push_back("ill-conditioned Gram matrix, decoupled amplitudes used");
  if (!result.converged) result.warnings.push_back("refinement did not reach the gradient tolerance");
  return result;
}

void attach_normalized_errors(EstimationResult& result, const HarmonicModel& truth, double horizon) {
  if (truth.size() != result.estimate.size()) {
    fail(ErrorCode::validation, "truth and estimate have different numbers of harmonics");
  }
  result.normalized_errors.clear();
  const double root = std::sqrt(horizon);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto& e = result.estimate[k];
    const auto& t = truth.harmonics()[k];
    result.normalized_errors.push_back(
        {root * (e.a - t.a), root * (e.b - t.b), horizon * root * (e.frequency - t.frequency)});
  }
}

std::array<double, 2> walker_ratios(double phi_hat, double phi, double horizon) {
  const double u = horizon * (phi_hat - phi);
  if (u == 0.0) return {1.0, 0.0};
  return {std::sin(u) / u, (1.0 - std::cos(u)) / u};
}

}  // namespace hpreg
