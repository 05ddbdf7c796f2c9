#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hpreg/config.hpp"
#include "hpreg/errors.hpp"
#include "hpreg/harness.hpp"

namespace hpreg {
namespace {

constexpr int kMinNormalitySamples = 100;

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(v(i));
  }
  return out;
}

void matrix_lines(std::ostream& os, const std::string& name, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << name << "_row" << r + 1 << " = " << join(m.row(r).transpose()) << "\n";
  }
}

std::string format_slope(double s, bool floor_limited) {
  return floor_limited ? "-inf (floor-limited)" : format_double(s);
}

}  // namespace

NormalitySummary normality_diagnostics(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& gamma) {
  const auto n = samples.rows();
  const auto q = samples.cols();
  if (n < kMinNormalitySamples) {
    fail(ErrorCode::insufficient_samples, "normality diagnostics need at least 100 samples (got " +
                                              std::to_string(n) + ")");
  }
  if (gamma.rows() != q || gamma.cols() != q) fail(ErrorCode::validation, "gamma does not match the sample width");
  const double nd = static_cast<double>(n);
  NormalitySummary s;
  s.skewness.resize(q);
  s.excess_kurtosis.resize(q);
  // Standard errors of the sample skewness and excess kurtosis under normality.
  const double skew_se = std::sqrt(6.0 * nd * (nd - 1) / ((nd - 2) * (nd + 1) * (nd + 3)));
  const double kurt_se = 2.0 * skew_se * std::sqrt((nd * nd - 1) / ((nd - 3) * (nd + 5)));
  s.skewness_se = Eigen::VectorXd::Constant(q, skew_se);
  s.kurtosis_se = Eigen::VectorXd::Constant(q, kurt_se);
  const boost::math::normal normal;
  s.coverage.rates.resize(q, 3);
  for (Eigen::Index c = 0; c < q; ++c) {
    const auto col = samples.col(c);
    const double mean = col.mean();
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = col(i) - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;
    if (!(m2 > 0.0)) fail(ErrorCode::degenerate, "sample column " + std::to_string(c + 1) + " has zero variance");
    s.skewness(c) = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis(c) = m4 / (m2 * m2) - 3.0;
    for (int l = 0; l < 3; ++l) {
      const double z = boost::math::quantile(normal, 0.5 + s.coverage.levels[static_cast<std::size_t>(l)] / 2);
      const double half = z * std::sqrt(gamma(c, c));
      int hit = 0;
      for (Eigen::Index i = 0; i < n; ++i) hit += std::abs(col(i)) <= half ? 1 : 0;
      s.coverage.rates(c, l) = hit / nd;
    }
  }
  return s;
}

std::string MonteCarloReport::to_text() const {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "replications = " << config.replications << "\n";
  os << "seed = " << config.master_seed << "\n";
  os << "mode = " << to_string(config.mode) << "\n";
  os << "truncation = " << config.truncation << "\n";
  os << "time_offset = " << format_double(config.time_offset) << "\n";
  os << "noiseless = " << (config.noiseless ? "true" : "false") << "\n";
  os << "transform = " << to_string(config.transform.kind()) << "\n";
  os << "harmonics = " << config.model.size() << "\n";
  os << "eta2_decreasing = " << (eta2_decreasing ? "true" : "false") << "\n";
  os << "\n[noise]\n" << config.noise.to_config();
  os << "\n[model]\n" << config.model.to_config();
  for (const auto& h : horizons) {
    os << "\n[horizon]\n";
    os << "T = " << format_double(h.grid.horizon) << "\n";
    os << "step = " << format_double(h.grid.step) << "\n";
    os << "requested = " << h.requested << "\n";
    os << "failed = " << h.failed << "\n";
    os << "non_converged = " << h.non_converged << "\n";
    os << "used = " << h.used << "\n";
    os << "mean = " << join(h.mean) << "\n";
    matrix_lines(os, "covariance", h.covariance);
    matrix_lines(os, "gamma_derived", h.gamma_derived);
    matrix_lines(os, "gamma_as_printed", h.gamma_printed);
    matrix_lines(os, "relative_deviation_derived", h.relative_deviation_derived);
    matrix_lines(os, "relative_deviation_as_printed", h.relative_deviation_printed);
    matrix_lines(os, "significant", h.significant.cast<double>());
    os << "coverage95 = " << join(h.coverage95) << "\n";
    matrix_lines(os, "plug_in_median_deviation", h.plug_in_median_deviation);
    os << "bound_violations = " << h.bound_violations << "\n";
    os << "median_abs_amplitude_error = " << format_double(h.median_abs_amplitude_error) << "\n";
    os << "median_abs_frequency_error = " << format_double(h.median_abs_frequency_error) << "\n";
    os << "mean_eta2 = " << format_double(h.mean_eta2) << "\n";
    if (h.used >= kMinNormalitySamples) {
      try {
        const auto n = normality_diagnostics(h.samples, h.gamma_derived);
        os << "skewness = " << join(n.skewness) << "\n";
        os << "skewness_se = " << format_double(n.skewness_se(0)) << "\n";
        os << "excess_kurtosis = " << join(n.excess_kurtosis) << "\n";
        os << "excess_kurtosis_se = " << format_double(n.kurtosis_se(0)) << "\n";
        os << "coverage90 = " << join(n.coverage.rates.col(0)) << "\n";
        os << "coverage99 = " << join(n.coverage.rates.col(2)) << "\n";
      } catch (const Error& e) {
        os << "normality = " << e.what() << "\n";
      }
    }
    for (const auto& f : h.failures) os << "failure = " << f << "\n";
  }
  if (!slopes.horizons.empty()) {
    os << "\n[slopes]\n";
    Eigen::Map<const Eigen::VectorXd> t(slopes.horizons.data(), static_cast<Eigen::Index>(slopes.horizons.size()));
    os << "T = " << join(t) << "\n";
    os << "amplitude_medians = "
       << join(Eigen::Map<const Eigen::VectorXd>(slopes.amplitude_medians.data(), t.size())) << "\n";
    os << "frequency_medians = "
       << join(Eigen::Map<const Eigen::VectorXd>(slopes.frequency_medians.data(), t.size())) << "\n";
    os << "amplitude_slope = " << format_slope(slopes.amplitude_slope, slopes.amplitude_floor_limited) << "\n";
    os << "frequency_slope = " << format_slope(slopes.frequency_slope, slopes.frequency_floor_limited) << "\n";
  }
  return os.str();
}

void MonteCarloReport::write(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "report.txt", std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + (dir / "report.txt").string());
    out << to_text();
  }
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const auto& h = horizons[i];
    std::vector<std::string> header{"replication"};
    for (std::size_t k = 1; 3 * (k - 1) < static_cast<std::size_t>(h.samples.cols()); ++k) {
      for (const char* name : {"A", "B", "phi"}) header.push_back(std::string("d") + name + "_" + std::to_string(k));
    }
    std::vector<std::vector<double>> cols(header.size());
    for (Eigen::Index r = 0; r < h.samples.rows(); ++r) {
      cols[0].push_back(h.sample_index[static_cast<std::size_t>(r)]);
      for (Eigen::Index c = 0; c < h.samples.cols(); ++c) cols[static_cast<std::size_t>(c + 1)].push_back(h.samples(r, c));
    }
    CsvTable(header, cols).save(dir / ("samples_" + std::to_string(i + 1) + ".csv"));
  }
  std::ofstream runtime(dir / "runtime.txt", std::ios::binary);
  runtime << "seconds = " << format_double(seconds) << "\n";
}

}  // namespace hpreg
