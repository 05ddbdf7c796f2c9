#include "hpreg/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "hpreg/config.hpp"
#include "hpreg/errors.hpp"
#include "hpreg/quadrature.hpp"

namespace hpreg {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNegligibleWeight = 1e-24;  // C_j^2 / j! below this is skipped
constexpr std::size_t kMemoLimit = 200'000;
constexpr double kWindowPeriods = 200.0;

double inverse_factorial(int j) { return std::exp(-std::lgamma(j + 1.0)); }

// Product of component envelopes raised to the multiplicities in n.
double envelope_power(const NoiseSpec& spec, const std::vector<int>& n, double t) {
  const double at = std::abs(t);
  double log_sum = 0.0;
  const auto& cs = spec.components();
  for (std::size_t j = 0; j < cs.size(); ++j) {
    if (n[j] == 0) continue;
    const double base = cs[j].has_closed_form() ? at * at : std::pow(at, cs[j].shape);
    log_sum -= 0.5 * cs[j].decay * n[j] * std::log1p(base);
  }
  return std::exp(log_sum);
}

struct TermKey {
  std::vector<int> n;  // envelope multiplicity per component
  std::vector<int> m;  // signed carrier multiplicity per component

  bool operator<(const TermKey& o) const { return std::tie(n, m) < std::tie(o.n, o.m); }
};

// cos is even, so (n, m) and (n, -m) describe the same term.
void canonicalize(std::vector<int>& m) {
  for (int v : m) {
    if (v == 0) continue;
    if (v < 0) {
      for (int& w : m) w = -w;
    }
    return;
  }
}

// B(t)^k = sum over terms of coef * envelope_n(t) * cos(sum_j m_j kappa_j t).
std::map<TermKey, double> expand_power(const NoiseSpec& spec, int k) {
  const auto& cs = spec.components();
  const std::size_t c = cs.size();
  std::map<TermKey, double> terms{{TermKey{std::vector<int>(c, 0), std::vector<int>(c, 0)}, 1.0}};
  for (int step = 0; step < k; ++step) {
    std::map<TermKey, double> next;
    for (const auto& [key, coef] : terms) {
      for (std::size_t j = 0; j < c; ++j) {
        if (cs[j].weight == 0.0) continue;
        auto n = key.n;
        ++n[j];
        if (cs[j].carrier == 0.0) {
          next[TermKey{n, key.m}] += coef * cs[j].weight;
          continue;
        }
        for (int sign : {1, -1}) {
          auto m = key.m;
          m[j] += sign;
          canonicalize(m);
          next[TermKey{n, m}] += 0.5 * coef * cs[j].weight;
        }
      }
    }
    terms = std::move(next);
  }
  return terms;
}

ConvolutionValue compute_convolution(const NoiseSpec& spec, int k, double lambda) {
  const auto terms = expand_power(spec, k);
  const auto& cs = spec.components();
  std::map<std::pair<std::vector<int>, double>, quad::Estimate> transforms;
  auto transform = [&](const std::vector<int>& n, double omega) {
    omega = std::abs(omega);
    auto key = std::make_pair(n, omega);
    auto it = transforms.find(key);
    if (it != transforms.end()) return it->second;
    const auto est = quad::cosine_transform([&](double t) { return envelope_power(spec, n, t); }, omega);
    transforms.emplace(std::move(key), est);
    return est;
  };
  ConvolutionValue out;
  for (const auto& [key, coef] : terms) {
    double nu = 0.0;
    for (std::size_t j = 0; j < cs.size(); ++j) nu += key.m[j] * cs[j].carrier;
    // cos(nu t) cos(lambda t) = [cos((lambda + nu) t) + cos((lambda - nu) t)] / 2
    const auto plus = transform(key.n, lambda + nu);
    const auto minus = transform(key.n, lambda - nu);
    const double w = coef / (2.0 * std::numbers::pi);
    out.value += w * (plus.value + minus.value);
    out.error += std::abs(w) * (plus.error + minus.error);
  }
  return out;
}

struct Memo {
  std::mutex mutex;
  std::unordered_map<std::string, ConvolutionValue> values;
};

Memo& memo() {
  static Memo m;
  return m;
}

std::string memo_key(const NoiseSpec& spec, int k, double lambda) {
  std::string key = spec.to_config();
  char buf[sizeof(double) + sizeof(int)];
  std::memcpy(buf, &lambda, sizeof(double));
  std::memcpy(buf + sizeof(double), &k, sizeof(int));
  key.append(buf, sizeof(buf));
  return key;
}

void require_integrable(const NoiseSpec& spec, int k) {
  if (!(spec.min_decay() * k > 1.0)) {
    fail(ErrorCode::non_integrable, "B^" + std::to_string(k) + " is not integrable: alpha_min * k = " +
                                        format_double(spec.min_decay() * k) + " <= 1");
  }
}

void require_amplitude(double a, double b) {
  if (!(a * a + b * b > 0.0)) fail(ErrorCode::zero_amplitude, "harmonic with A^2 + B^2 = 0");
}

bool all_carriers_zero(const NoiseSpec& spec) {
  return std::all_of(spec.components().begin(), spec.components().end(),
                     [](const NoiseComponent& c) { return c.carrier == 0.0; });
}

// S(lambda) = sum_{j=m}^{J} C_j^2 / j! f^{(*j)}(lambda)
ConvolutionValue spectral_sum(const HermiteExpansion& g, const NoiseSpec& spec, double lambda, int truncation) {
  if (truncation < g.rank) fail(ErrorCode::validation, "truncation order is below the Hermite rank");
  if (static_cast<std::size_t>(truncation) >= g.coeffs.size()) {
    fail(ErrorCode::validation, "truncation order " + std::to_string(truncation) +
                                    " exceeds the computed Hermite coefficients (raise kmax)");
  }
  require_integrable(spec, g.rank);
  ConvolutionValue s;
  for (int j = g.rank; j <= truncation; ++j) {
    const double w = g.coeffs[static_cast<std::size_t>(j)] * g.coeffs[static_cast<std::size_t>(j)] * inverse_factorial(j);
    if (w <= kNegligibleWeight) continue;
    const auto f = self_convolution(spec, j, lambda);
    s.value += w * f.value;
    s.error += w * f.error;
  }
  return s;
}

std::string format_row(const Eigen::Matrix3d& m, int r) {
  return format_double(m(r, 0)) + ", " + format_double(m(r, 1)) + ", " + format_double(m(r, 2));
}

}  // namespace

ConvolutionValue self_convolution(const NoiseSpec& spec, int k, double lambda) {
  if (k < 1) fail(ErrorCode::domain, "convolution order must be >= 1");
  require_integrable(spec, k);
  lambda = std::abs(lambda);
  const auto key = memo_key(spec, k, lambda);
  auto& m = memo();
  {
    std::lock_guard lock(m.mutex);
    auto it = m.values.find(key);
    if (it != m.values.end()) return it->second;
  }
  const auto value = compute_convolution(spec, k, lambda);
  std::lock_guard lock(m.mutex);
  if (m.values.size() >= kMemoLimit) m.values.clear();
  m.values.emplace(key, value);
  return value;
}

double covariance_power_tail(const NoiseSpec& spec, int m, double a) {
  if (m < 1) fail(ErrorCode::domain, "power must be >= 1");
  require_integrable(spec, m);
  a = std::max(a, 0.0);
  if (all_carriers_zero(spec)) {
    return quad::half_line([&](double t) { return std::pow(covariance(spec, t), m); }, a, 1e-10).value;
  }
  double kappa_min = std::numeric_limits<double>::infinity();
  double kappa_max = 0.0;
  for (const auto& c : spec.components()) {
    if (c.carrier == 0.0) continue;
    kappa_min = std::min(kappa_min, c.carrier);
    kappa_max = std::max(kappa_max, c.carrier);
  }
  const double window = kWindowPeriods * kTwoPi / kappa_min;
  const double panel = std::numbers::pi / kappa_max;
  const auto panels = static_cast<int>(std::ceil(window / panel));
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    sum += quad::finite([&](double t) { return std::pow(std::abs(covariance(spec, t)), m); }, a + p * panel,
                        a + (p + 1) * panel, 1e-9)
               .value;
  }
  const double edge = a + panels * panel;
  sum += quad::half_line([&](double t) { return std::pow(covariance_envelope(spec, t), m); }, edge, 1e-10).value;
  return sum;
}

double covariance_power_integral(const NoiseSpec& spec, int m) { return 2.0 * covariance_power_tail(spec, m, 0.0); }

GramBlock gram_block(double a, double b) {
  require_amplitude(a, b);
  const double c = std::hypot(a, b);
  const double r3 = std::sqrt(3.0);
  GramBlock out;
  out.gram = Eigen::Matrix3d::Identity();
  out.gram(0, 2) = out.gram(2, 0) = r3 * b / (2.0 * c);
  out.gram(1, 2) = out.gram(2, 1) = -r3 * a / (2.0 * c);
  out.scalers = Eigen::Vector3d(std::sqrt(0.5), std::sqrt(0.5), c / std::sqrt(6.0));
  return out;
}

std::string to_string(GammaMode mode) { return mode == GammaMode::derived ? "derived" : "as-printed"; }

GammaMode parse_gamma_mode(std::string_view text) {
  if (text == "derived") return GammaMode::derived;
  if (text == "as-printed" || text == "as_printed") return GammaMode::as_printed;
  fail(ErrorCode::validation, "unknown gamma mode '" + std::string(text) + "' (derived|as-printed)");
}

SpectralFactor spectral_factor(const HermiteExpansion& g, const NoiseSpec& spec, double phi, int truncation) {
  const auto s = spectral_sum(g, spec, phi, truncation);
  SpectralFactor out;
  out.value = s.value;
  out.quadrature_error = s.error;
  out.rank = g.rank;
  out.truncation = truncation;
  double kept = 0.0;
  for (int j = 1; j <= truncation; ++j) {
    kept += g.coeffs[static_cast<std::size_t>(j)] * g.coeffs[static_cast<std::size_t>(j)] * inverse_factorial(j);
  }
  const double rest = std::max(0.0, g.second_moment - kept);
  if (rest > 0.0) out.tail_bound = covariance_power_integral(spec, g.rank) / kTwoPi * rest;
  return out;
}

Eigen::Matrix3d gamma_block(double a, double b, double s, GammaMode mode) {
  require_amplitude(a, b);
  const double c2 = a * a + b * b;
  if (mode == GammaMode::as_printed) {
    Eigen::Matrix3d m;
    m << c2, -3 * a * b, -6 * b, -3 * a * b, c2, 6 * a, -6 * b, 6 * a, 12;
    return 4.0 * std::numbers::pi * s / c2 * m;
  }
  const auto block = gram_block(a, b);
  const Eigen::Matrix3d d = block.scalers.cwiseInverse().asDiagonal();
  const Eigen::Matrix3d g = d * (kTwoPi * s * block.gram.inverse()) * d;
  return 0.5 * (g + g.transpose());
}

Eigen::Matrix3d gamma_matrix(double a, double b, double phi, const HermiteExpansion& g, const NoiseSpec& spec,
                             int truncation, GammaMode mode) {
  require_amplitude(a, b);
  return gamma_block(a, b, spectral_factor(g, spec, phi, truncation).value, mode);
}

std::vector<SpectralAtom> trigonometric_atoms(double a, double b, double phi) {
  require_amplitude(a, b);
  const double c = std::hypot(a, b);
  const double r3 = std::sqrt(3.0);
  const std::complex<double> i(0.0, 1.0);
  std::vector<SpectralAtom> atoms;
  for (double sign : {1.0, -1.0}) {
    const double delta = 0.5;
    const double rho = 0.5 * sign;
    const std::complex<double> beta = r3 * (b * delta + i * a * rho) / (2.0 * c);
    const std::complex<double> gamma = r3 * (-a * delta - i * b * rho) / (2.0 * c);
    Eigen::Matrix3cd m;
    m << delta, i * rho, std::conj(beta), -i * rho, delta, std::conj(gamma), beta, gamma, delta;
    atoms.push_back({sign * phi, m});
  }
  return atoms;
}

SigmaPair sigma_general(const HermiteExpansion& g, const NoiseSpec& spec, const std::vector<SpectralAtom>& atoms,
                        int truncation) {
  if (atoms.empty()) fail(ErrorCode::validation, "spectral measure has no atoms");
  const auto q = atoms.front().mass.rows();
  const auto singular = singular_points(spec);
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(q, q);
  Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(q, q);
  for (const auto& atom : atoms) {
    if (atom.mass.rows() != q || atom.mass.cols() != q) {
      fail(ErrorCode::validation, "atom mass blocks must all be square of the same size");
    }
    for (const auto& p : singular) {
      if (std::abs(std::abs(atom.location) - std::abs(p.frequency)) <= 1e-12 * std::max(1.0, std::abs(p.frequency))) {
        fail(ErrorCode::overlap, "regression atom at " + format_double(atom.location) +
                                     " coincides with a noise spectral singularity");
      }
    }
    total += atom.mass;
    sigma += kTwoPi * spectral_sum(g, spec, atom.location, truncation).value * atom.mass;
  }
  const Eigen::MatrixXd mass = total.real();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(mass);
  if (!lu.isInvertible() || std::abs(lu.determinant()) <= 1e-14 * std::pow(mass.norm(), static_cast<double>(q))) {
    fail(ErrorCode::singular_system, "total mass of the spectral measure is singular");
  }
  const Eigen::MatrixXd inv = lu.inverse();
  SigmaPair out;
  out.sigma = sigma.real();
  out.sigma0 = inv * out.sigma * inv;
  out.sigma0 = 0.5 * (out.sigma0 + out.sigma0.transpose()).eval();
  return out;
}

GammaReport gamma_report(const std::vector<Harmonic>& harmonics, const HermiteExpansion& g, const NoiseSpec& spec,
                         int truncation, GammaMode mode) {
  GammaReport r;
  r.mode = mode;
  r.truncation = truncation;
  for (const auto& h : harmonics) {
    GammaBlockReport block;
    block.harmonic = h;
    block.factor = spectral_factor(g, spec, h.frequency, truncation);
    block.gamma = gamma_block(h.a, h.b, block.factor.value, mode);
    block.eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(block.gamma, Eigen::EigenvaluesOnly).eigenvalues();
    r.blocks.push_back(block);
  }
  return r;
}

GammaReport plug_in_gamma(const EstimationResult& result, const HermiteExpansion& g, const NoiseSpec& spec,
                          int truncation, GammaMode mode) {
  return gamma_report(result.estimate, g, spec, truncation, mode);
}

double plug_in_perturbation_bound(const NoiseSpec& spec, int m, double horizon, double phi_hat, double phi) {
  if (!(horizon > 0.0)) fail(ErrorCode::domain, "horizon must be positive");
  return covariance_power_integral(spec, m) / kTwoPi * horizon * std::abs(phi_hat - phi) +
         2.0 / horizon * covariance_power_tail(spec, m, horizon);
}

std::string GammaReport::to_text() const {
  std::ostringstream os;
  os << "mode = " << to_string(mode) << "\n";
  os << "truncation = " << truncation << "\n";
  os << "harmonics = " << blocks.size() << "\n";
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = blocks[k];
    os << "\n[block]\n";
    os << "index = " << k + 1 << "\n";
    os << "A = " << format_double(b.harmonic.a) << "\n";
    os << "B = " << format_double(b.harmonic.b) << "\n";
    os << "phi = " << format_double(b.harmonic.frequency) << "\n";
    os << "rank = " << b.factor.rank << "\n";
    os << "s = " << format_double(b.factor.value) << "\n";
    os << "s_quadrature_error = " << format_double(b.factor.quadrature_error) << "\n";
    os << "s_tail_bound = " << format_double(b.factor.tail_bound) << "\n";
    os << "eigenvalues = " << format_double(b.eigenvalues(0)) << ", " << format_double(b.eigenvalues(1)) << ", "
       << format_double(b.eigenvalues(2)) << "\n";
    for (int r = 0; r < 3; ++r) os << "gamma_row" << r + 1 << " = " << format_row(b.gamma, r) << "\n";
  }
  return os.str();
}

CsvTable GammaReport::to_csv() const {
  std::vector<std::vector<double>> cols(4);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        cols[0].push_back(static_cast<double>(k + 1));
        cols[1].push_back(r + 1);
        cols[2].push_back(c + 1);
        cols[3].push_back(blocks[k].gamma(r, c));
      }
    }
  }
  return CsvTable({"harmonic", "row", "col", "value"}, std::move(cols));
}

}  // namespace hpreg
