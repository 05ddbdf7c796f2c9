#include "hpreg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hpreg/errors.hpp"
#include "hpreg/fft.hpp"

namespace hpreg {
namespace {

constexpr double kEigenTolerance = 1e-8;
constexpr std::size_t kMaxPadding = 16;

}  // namespace

SamplingGrid SamplingGrid::make(double horizon, double step) {
  if (!(horizon > 0.0) || !(step > 0.0) || !std::isfinite(horizon) || !std::isfinite(step)) {
    fail(ErrorCode::validation, "grid horizon and step must be positive");
  }
  const double ratio = std::round(horizon / step);
  if (ratio < 2.0) fail(ErrorCode::validation, "grid needs at least two samples");
  if (std::abs(ratio * step - horizon) > 1e-12 * horizon) {
    fail(ErrorCode::validation, "horizon is not an integer multiple of step");
  }
  return {horizon, step, static_cast<std::size_t>(ratio)};
}

SamplingGrid SamplingGrid::from_config(const ConfigSection& section) {
  return make(section.get_double("horizon"), section.get_double_or("step", 0.25));
}

double SamplingGrid::nyquist() const noexcept { return std::numbers::pi / step; }

HarmonicModel::HarmonicModel(std::vector<Harmonic> harmonics, double band_low, double band_high)
    : harmonics_(std::move(harmonics)), band_low_(band_low), band_high_(band_high) {
  if (!(band_low >= 0.0) || !(band_high > band_low) || !std::isfinite(band_high)) {
    fail(ErrorCode::validation, "band must satisfy 0 <= low < high");
  }
  double previous = band_low;
  for (const auto& h : harmonics_) {
    if (!std::isfinite(h.a) || !std::isfinite(h.b) || !std::isfinite(h.frequency)) {
      fail(ErrorCode::validation, "harmonic parameters must be finite");
    }
    if (h.a * h.a + h.b * h.b <= 0.0) fail(ErrorCode::zero_amplitude, "harmonic with A^2 + B^2 = 0");
    if (!(h.frequency > previous)) {
      fail(ErrorCode::validation, "frequencies must be strictly increasing inside the open band");
    }
    previous = h.frequency;
  }
  if (!harmonics_.empty() && !(previous < band_high)) {
    fail(ErrorCode::validation, "frequencies must lie strictly below the band upper edge");
  }
}

HarmonicModel HarmonicModel::from_config(const ConfigDocument& doc) {
  double lo = 0.1;
  double hi = 3.0;
  if (doc.root().has("band")) {
    const auto band = doc.root().get_list("band");
    if (band.size() != 2) fail(ErrorCode::validation, doc.origin() + ": band needs two values");
    lo = band[0];
    hi = band[1];
  }
  std::vector<Harmonic> hs;
  for (const auto* block : doc.blocks("harmonic")) {
    hs.push_back({block->get_double("A"), block->get_double("B"), block->get_double("phi")});
  }
  return HarmonicModel(std::move(hs), lo, hi);
}

std::string HarmonicModel::to_config() const {
  std::string out = "band = " + format_double(band_low_) + ", " + format_double(band_high_) + "\n";
  for (const auto& h : harmonics_) {
    out += "\n[harmonic]\nA = " + format_double(h.a) + "\nB = " + format_double(h.b) +
           "\nphi = " + format_double(h.frequency) + "\n";
  }
  return out;
}

double HarmonicModel::operator()(double t) const {
  double sum = 0.0;
  for (const auto& h : harmonics_) sum += h.a * std::cos(h.frequency * t) + h.b * std::sin(h.frequency * t);
  return sum;
}

CirculantEmbedding::CirculantEmbedding(const NoiseSpec& spec, const SamplingGrid& grid, bool approximate)
    : n_(grid.count) {
  const std::size_t base = fft::next_power_of_two(2 * (n_ - 1));
  std::vector<double> lambda;
  for (std::size_t m = base; m <= kMaxPadding * base; m *= 2) {
    std::vector<double> row(m);
    for (std::size_t k = 0; k <= m / 2; ++k) {
      row[k] = covariance(spec, static_cast<double>(k) * grid.step);
      if (k > 0 && k < m / 2) row[m - k] = row[k];
    }
    const auto spectrum = fft::real_forward(row, m);
    lambda.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) lambda[k] = spectrum[std::min(k, m - k)].real();
    min_eigenvalue_ = *std::min_element(lambda.begin(), lambda.end());
    if (min_eigenvalue_ >= -kEigenTolerance) break;
  }
  if (min_eigenvalue_ < -kEigenTolerance && !approximate) {
    fail(ErrorCode::embedding_failure,
         "circulant embedding has eigenvalue " + format_double(min_eigenvalue_) + " after 16x padding");
  }
  double negative = 0.0;
  double total = 0.0;
  for (double& l : lambda) {
    total += std::abs(l);
    if (l < 0.0) {
      negative += -l;
      l = 0.0;
    }
  }
  discarded_fraction_ = negative / total;
  if (negative > 0.0) {
    warnings_.push_back(min_eigenvalue_ < -kEigenTolerance
                            ? "approximate embedding: discarded negative eigenvalue mass fraction " +
                                  format_double(discarded_fraction_)
                            : "clamped negative eigenvalues above -1e-8 to zero");
  }
  const double m = static_cast<double>(lambda.size());
  scale_.resize(lambda.size());
  for (std::size_t k = 0; k < lambda.size(); ++k) scale_[k] = std::sqrt(lambda[k] / m);
  eigenvalues_ = std::move(lambda);
}

std::vector<double> CirculantEmbedding::sample(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  fft::ComplexVector w(scale_.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double re = z(rng);
    const double im = z(rng);
    w[k] = {scale_[k] * re, scale_[k] * im};
  }
  fft::forward(w);
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = w[i].real();
  return out;
}

std::vector<double> gaussian_path(const NoiseSpec& spec, const SamplingGrid& grid, std::uint64_t seed,
                                  bool approximate) {
  return CirculantEmbedding(spec, grid, approximate).sample(seed);
}

std::vector<double> subordinate(const std::vector<double>& xi, const TransformSpec& transform) {
  std::vector<double> out(xi.size());
  if (transform.kind() == TransformKind::identity) return xi;
  std::transform(xi.begin(), xi.end(), out.begin(), [&](double x) { return transform(x); });
  return out;
}

std::vector<double> regression_signal(const HarmonicModel& model, const SamplingGrid& grid) {
  if (!(model.band_high() < grid.nyquist())) {
    fail(ErrorCode::nyquist, "band upper edge " + format_double(model.band_high()) + " reaches Nyquist pi/step = " +
                                 format_double(grid.nyquist()));
  }
  std::vector<double> out(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) out[i] = model(grid.time(i));
  return out;
}

CsvTable SamplePath::to_csv() const {
  std::vector<double> t(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) t[i] = grid.time(i);
  std::vector<std::string> header{"t", "x"};
  std::vector<std::vector<double>> cols{t, values};
  if (!signal.empty() && !noise.empty()) {
    header.insert(header.end(), {"signal", "noise"});
    cols.push_back(signal);
    cols.push_back(noise);
  }
  return CsvTable(std::move(header), std::move(cols));
}

SamplePath SamplePath::from_csv(const CsvTable& table) {
  const auto& t = table.column("t");
  if (t.size() < 2) fail(ErrorCode::validation, "path needs at least two samples");
  if (std::abs(t[0]) > 1e-12) fail(ErrorCode::validation, "path time column must start at 0");
  const double step = t[1] - t[0];
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs(t[i] - static_cast<double>(i) * step) > 1e-9 * std::max(1.0, t[i])) {
      fail(ErrorCode::validation, "path time column is not uniform");
    }
  }
  SamplePath path;
  path.grid = SamplingGrid::make(step * static_cast<double>(t.size()), step);
  path.values = table.column("x");
  if (table.has("signal") && table.has("noise")) {
    path.signal = table.column("signal");
    path.noise = table.column("noise");
  }
  return path;
}

Simulator::Simulator(HarmonicModel model, NoiseSpec spec, TransformSpec transform, SamplingGrid grid,
                     ObserveOptions options)
    : model_(std::move(model)),
      spec_(std::move(spec)),
      transform_(std::move(transform)),
      grid_(grid),
      options_(options),
      embedding_(spec_, grid_, options.approximate_embedding) {
  rank_ = hermite_rank(hermite_coefficients(transform_, transform_.kmax()));
  if (!(spec_.min_decay() * rank_ > 1.0)) {
    const std::string msg = "weak-dependence condition alpha_min * m > 1 fails: " +
                            format_double(spec_.min_decay()) + " * " + std::to_string(rank_);
    if (!options_.allow_weak_dependence_violation) fail(ErrorCode::non_integrable, msg);
    warnings_.push_back(msg);
  }
  signal_ = regression_signal(model_, grid_);
  warnings_.insert(warnings_.end(), embedding_.warnings().begin(), embedding_.warnings().end());
}

std::vector<double> Simulator::noise(std::uint64_t seed) const {
  return subordinate(embedding_.sample(seed), transform_);
}

SamplePath Simulator::observe(std::uint64_t seed) const {
  SamplePath path;
  path.grid = grid_;
  auto eps = noise(seed);
  path.values.resize(grid_.count);
  for (std::size_t i = 0; i < grid_.count; ++i) path.values[i] = signal_[i] + eps[i];
  if (options_.keep_components) {
    path.signal = signal_;
    path.noise = std::move(eps);
  }
  path.warnings = warnings_;
  return path;
}

SamplePath observe(const HarmonicModel& model, const NoiseSpec& spec, const TransformSpec& transform,
                   const SamplingGrid& grid, std::uint64_t seed, const ObserveOptions& options) {
  return Simulator(model, spec, transform, grid, options).observe(seed);
}

double fourier_sup(const std::vector<double>& values, const SamplingGrid& grid) {
  const std::size_t m = fft::next_power_of_two(8 * values.size());
  const auto spectrum = fft::real_forward(values, m);
  double best = 0.0;
  for (const auto& c : spectrum) best = std::max(best, std::abs(c));
  return best * grid.step / grid.horizon;
}

}  // namespace hpreg
