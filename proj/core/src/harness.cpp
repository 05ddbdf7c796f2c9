#include "hpreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "hpreg/config.hpp"
#include "hpreg/errors.hpp"

namespace hpreg {
namespace {

constexpr double kMaxFailureFraction = 0.2;
constexpr double kSignificance = 0.05;
constexpr double kErrorFloor = 1e-10;
constexpr double kZ95 = 1.959963984540054;

// Runs fn(i) for i in [0, count) on up to `workers` threads; the first
// exception is rethrown after all workers stop.
template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)) + hi);
}

// Entry-wise (x - ref) / |ref|, falling back to the spectral norm of ref for
// zero entries.
Eigen::MatrixXd relative_deviation(const Eigen::MatrixXd& x, const Eigen::MatrixXd& ref) {
  const double norm = ref.operatorNorm();
  Eigen::MatrixXd out(ref.rows(), ref.cols());
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    for (Eigen::Index j = 0; j < ref.cols(); ++j) {
      const double d = ref(i, j) != 0.0 ? std::abs(ref(i, j)) : norm;
      out(i, j) = (x(i, j) - ref(i, j)) / d;
    }
  }
  return out;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// Everything a replication needs that does not depend on the seed.
struct HorizonContext {
  SamplingGrid grid;
  HarmonicModel truth;
  std::optional<Simulator> simulator;
  std::vector<double> signal;
  HermiteExpansion expansion;
  std::vector<int> orders;                 // j with non-negligible C_j^2 / j!
  std::vector<std::vector<double>> f_true;  // [harmonic][order] f^{(*j)}(phi)
  double bound_slope = 0.0;                 // B_m / 2pi
  double bound_tail = 0.0;                  // (2/T) int_T^inf |B|^m
  bool integrable = false;                  // alpha_min * m > 1
};

ReplicationOutcome run_one(const ExperimentConfig& cfg, const HorizonContext& ctx, int r) {
  ReplicationOutcome out;
  try {
    const auto seed = replication_seed(cfg.master_seed, static_cast<std::uint64_t>(r));
    SamplePath path;
    if (ctx.simulator) {
      path = ctx.simulator->observe(seed);
      out.eta2 = std::pow(fourier_sup(path.noise, ctx.grid), 2);
    } else {
      path.grid = ctx.grid;
      path.values = ctx.signal;
    }
    auto result = estimate(path, ctx.truth.size(), ctx.truth.band_low(), ctx.truth.band_high());
    attach_normalized_errors(result, ctx.truth, ctx.grid.horizon);
    out.converged = result.converged;
    out.estimate = result.estimate;
    const double root = std::sqrt(ctx.grid.horizon);
    for (const auto& e : result.normalized_errors) {
      out.normalized.insert(out.normalized.end(), e.begin(), e.end());
      out.raw.push_back(e[0] / root);
      out.raw.push_back(e[1] / root);
      out.raw.push_back(e[2] / (root * ctx.grid.horizon));
    }
    if (!out.converged || !ctx.integrable) return out;
    out.plug_in_gamma =
        block_gamma(plug_in_gamma(result, ctx.expansion, cfg.noise, cfg.truncation, GammaMode::derived));
    for (std::size_t k = 0; k < ctx.truth.size(); ++k) {
      const double phi = ctx.truth.harmonics()[k].frequency;
      const double phi_hat = result.estimate[k].frequency;
      const double bound = ctx.bound_slope * ctx.grid.horizon * std::abs(phi_hat - phi) + ctx.bound_tail;
      for (std::size_t o = 0; o < ctx.orders.size(); ++o) {
        const double d = std::abs(self_convolution(cfg.noise, ctx.orders[o], phi_hat).value - ctx.f_true[k][o]);
        if (!(d <= bound)) out.bound_holds = false;
      }
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.failure = e.what();
  }
  return out;
}

HorizonContext make_context(const ExperimentConfig& cfg, const SamplingGrid& grid, const HarmonicModel& truth,
                            const HermiteExpansion& expansion) {
  HorizonContext ctx{grid, truth, std::nullopt, {}, expansion, {}, {}, 0.0, 0.0, false};
  if (cfg.noiseless) {
    ctx.signal = regression_signal(truth, grid);
  } else {
    ObserveOptions options;
    options.allow_weak_dependence_violation = cfg.allow_weak_dependence_violation;
    ctx.simulator.emplace(truth, cfg.noise, cfg.transform, grid, options);
  }
  const int m = expansion.rank;
  for (int j = m; j <= cfg.truncation && static_cast<std::size_t>(j) < expansion.coeffs.size(); ++j) {
    const double c = expansion.coeffs[static_cast<std::size_t>(j)];
    if (c * c * std::exp(-std::lgamma(j + 1.0)) > 1e-24) ctx.orders.push_back(j);
  }
  ctx.integrable = cfg.noise.min_decay() * m > 1.0;
  if (ctx.integrable) {
    for (const auto& h : truth.harmonics()) {
      std::vector<double> row;
      for (int j : ctx.orders) row.push_back(self_convolution(cfg.noise, j, h.frequency).value);
      ctx.f_true.push_back(std::move(row));
    }
    ctx.bound_slope = covariance_power_integral(cfg.noise, m) / (2.0 * std::numbers::pi);
    ctx.bound_tail = 2.0 / grid.horizon * covariance_power_tail(cfg.noise, m, grid.horizon);
  }
  return ctx;
}

HorizonSummary summarize(const ExperimentConfig& cfg, const HorizonContext& ctx,
                         const std::vector<ReplicationOutcome>& outcomes, const GammaReport& derived,
                         const GammaReport& printed) {
  HorizonSummary s;
  s.grid = ctx.grid;
  s.requested = cfg.replications;
  const auto q = static_cast<Eigen::Index>(3 * ctx.truth.size());
  std::vector<double> amp, freq, eta;
  for (int r = 0; r < cfg.replications; ++r) {
    const auto& o = outcomes[static_cast<std::size_t>(r)];
    if (o.failed) {
      ++s.failed;
      s.failures.push_back(std::to_string(r) + ": " + o.failure);
      continue;
    }
    eta.push_back(o.eta2);
    if (!o.converged) {
      ++s.non_converged;
      continue;
    }
    s.sample_index.push_back(r);
    for (std::size_t k = 0; k < ctx.truth.size(); ++k) {
      amp.push_back(std::abs(o.raw[3 * k]));
      amp.push_back(std::abs(o.raw[3 * k + 1]));
      freq.push_back(std::abs(o.raw[3 * k + 2]));
    }
    if (!o.bound_holds) ++s.bound_violations;
  }
  if (s.failed + s.non_converged > kMaxFailureFraction * cfg.replications) {
    std::string msg = "T = " + format_double(ctx.grid.horizon) + ": " + std::to_string(s.failed) + " failed and " +
                      std::to_string(s.non_converged) + " non-converged of " + std::to_string(cfg.replications) +
                      " replications (limit 20%)";
    if (!s.failures.empty()) msg += "; first failure " + s.failures.front();
    fail(ErrorCode::experiment_failure, msg);
  }
  s.used = static_cast<int>(s.sample_index.size());
  s.samples.resize(s.used, q);
  for (int i = 0; i < s.used; ++i) {
    const auto& o = outcomes[static_cast<std::size_t>(s.sample_index[static_cast<std::size_t>(i)])];
    for (Eigen::Index c = 0; c < q; ++c) s.samples(i, c) = o.normalized[static_cast<std::size_t>(c)];
  }
  s.mean = s.samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = s.samples.rowwise() - s.mean.transpose();
  s.covariance = centered.transpose() * centered / std::max(1, s.used - 1);
  s.gamma_derived = block_gamma(derived);
  s.gamma_printed = block_gamma(printed);
  s.relative_deviation_derived = relative_deviation(s.covariance, s.gamma_derived);
  s.relative_deviation_printed = relative_deviation(s.covariance, s.gamma_printed);
  const double norm = s.gamma_derived.operatorNorm();
  s.significant = (s.gamma_derived.array().abs() > kSignificance * norm).matrix();
  s.coverage95.resize(q);
  for (Eigen::Index c = 0; c < q; ++c) {
    const double half = kZ95 * std::sqrt(s.gamma_derived(c, c));
    int hit = 0;
    for (int i = 0; i < s.used; ++i) hit += std::abs(s.samples(i, c)) <= half ? 1 : 0;
    s.coverage95(c) = s.used > 0 ? static_cast<double>(hit) / s.used : 0.0;
  }
  s.plug_in_median_deviation.resize(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      std::vector<double> devs;
      for (int idx : s.sample_index) {
        const auto& g = outcomes[static_cast<std::size_t>(idx)].plug_in_gamma;
        if (g.size() == 0) continue;
        devs.push_back(std::abs(relative_deviation(g, s.gamma_derived)(i, j)));
      }
      s.plug_in_median_deviation(i, j) = median(std::move(devs));
    }
  }
  s.median_abs_amplitude_error = median(amp);
  s.median_abs_frequency_error = median(freq);
  double eta_sum = 0.0;
  for (double e : eta) eta_sum += e;
  s.mean_eta2 = eta.empty() ? 0.0 : eta_sum / static_cast<double>(eta.size());
  return s;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t replication) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ replication);
}

HarmonicModel shift_time_origin(const HarmonicModel& model, double t0) {
  std::vector<Harmonic> out;
  for (const auto& h : model.harmonics()) {
    const double c = std::cos(h.frequency * t0);
    const double s = std::sin(h.frequency * t0);
    out.push_back({h.a * c + h.b * s, h.b * c - h.a * s, h.frequency});
  }
  return HarmonicModel(out, model.band_low(), model.band_high());
}

ExperimentConfig ExperimentConfig::from_config(const ConfigDocument& doc, const std::filesystem::path& base_dir) {
  const auto& root = doc.root();
  auto resolve = [&](const std::string& key) {
    std::filesystem::path p = root.get(key);
    return p.is_absolute() ? p : base_dir / p;
  };
  ExperimentConfig c;
  c.model = HarmonicModel::from_config(ConfigDocument::load(resolve("model")));
  c.noise = NoiseSpec::from_config(ConfigDocument::load(resolve("noise")));
  c.transform = TransformSpec::from_config(ConfigDocument::load(resolve("transform")), resolve("transform").parent_path());
  const double step = root.get_double_or("step", 0.25);
  for (double t : root.get_list("horizons")) c.grids.push_back(SamplingGrid::make(t, step));
  c.replications = static_cast<int>(root.get_int("replications"));
  c.master_seed = static_cast<std::uint64_t>(root.get_int_or("seed", 0));
  c.mode = parse_gamma_mode(root.get_or("mode", "derived"));
  c.truncation = static_cast<int>(root.get_int_or("truncation", kDefaultTruncation));
  c.time_offset = root.get_double_or("time_offset", 0.0);
  c.noiseless = root.get_bool_or("noiseless", false);
  c.allow_weak_dependence_violation = root.get_bool_or("allow_weak_dependence_violation", false);
  if (root.has("output")) c.output_dir = resolve("output");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from_config(ConfigDocument::load(path), path.parent_path());
}

void ExperimentConfig::validate() const {
  if (replications < 2) fail(ErrorCode::validation, "replications must be >= 2");
  if (grids.empty()) fail(ErrorCode::validation, "experiment needs at least one horizon");
  if (model.size() == 0) fail(ErrorCode::validation, "experiment model needs at least one harmonic");
  if (truncation < 1) fail(ErrorCode::validation, "truncation must be >= 1");
  for (const auto& g : grids) {
    if (!(model.band_high() < g.nyquist())) {
      fail(ErrorCode::validation, "band upper edge " + format_double(model.band_high()) +
                                      " reaches the Nyquist frequency pi/step = " + format_double(g.nyquist()));
    }
  }
  const int m = hermite_rank(hermite_coefficients(transform, transform.kmax()));
  if (!(noise.min_decay() * m > 1.0) && !allow_weak_dependence_violation) {
    fail(ErrorCode::non_integrable, "alpha_min * m = " + format_double(noise.min_decay() * m) +
                                        " <= 1 (set allow_weak_dependence_violation to override)");
  }
}

Eigen::MatrixXd block_gamma(const GammaReport& report) {
  const auto q = static_cast<Eigen::Index>(3 * report.blocks.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(q, q);
  for (std::size_t k = 0; k < report.blocks.size(); ++k) {
    g.block<3, 3>(static_cast<Eigen::Index>(3 * k), static_cast<Eigen::Index>(3 * k)) = report.blocks[k].gamma;
  }
  return g;
}

MonteCarloReport run_replications(const ExperimentConfig& config, int workers) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  MonteCarloReport report;
  report.config = config;
  const auto truth = shift_time_origin(config.model, config.time_offset);
  const auto expansion = expand(config.transform);
  const bool integrable = config.noise.min_decay() * expansion.rank > 1.0;
  for (const auto& grid : config.grids) {
    const auto ctx = make_context(config, grid, truth, expansion);
    std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(config.replications));
    parallel_for(config.replications, workers,
                 [&](int r) { outcomes[static_cast<std::size_t>(r)] = run_one(config, ctx, r); });
    GammaReport derived, printed;
    if (integrable) {
      derived = gamma_report(truth.harmonics(), expansion, config.noise, config.truncation, GammaMode::derived);
      printed = gamma_report(truth.harmonics(), expansion, config.noise, config.truncation, GammaMode::as_printed);
    } else {
      // Outside the limit theory the reference covariance is undefined.
      derived.blocks.assign(truth.size(), {{}, Eigen::Matrix3d::Constant(std::nan("")), {}, {}});
      printed = derived;
    }
    report.horizons.push_back(summarize(config, ctx, outcomes, derived, printed));
  }
  for (std::size_t i = 1; i < report.horizons.size(); ++i) {
    if (!(report.horizons[i].mean_eta2 < report.horizons[i - 1].mean_eta2)) report.eta2_decreasing = false;
  }
  if (report.horizons.size() >= 3) report.slopes = consistency_sweep(report.horizons);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SlopeTable consistency_sweep(const std::vector<HorizonSummary>& horizons) {
  if (horizons.size() < 3) fail(ErrorCode::validation, "consistency sweep needs at least three horizons");
  SlopeTable t;
  for (const auto& h : horizons) {
    t.horizons.push_back(h.grid.horizon);
    t.amplitude_medians.push_back(h.median_abs_amplitude_error);
    t.frequency_medians.push_back(h.median_abs_frequency_error);
  }
  auto floor_limited = [](const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return !(x > kErrorFloor); });
  };
  t.amplitude_floor_limited = floor_limited(t.amplitude_medians);
  t.frequency_floor_limited = floor_limited(t.frequency_medians);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  t.amplitude_slope = t.amplitude_floor_limited ? neg_inf : fit_slope(t.horizons, t.amplitude_medians);
  t.frequency_slope = t.frequency_floor_limited ? neg_inf : fit_slope(t.horizons, t.frequency_medians);
  return t;
}

SlopeTable consistency_sweep(const ExperimentConfig& config, int workers) {
  if (config.grids.size() < 3) fail(ErrorCode::validation, "consistency sweep needs at least three horizons");
  return run_replications(config, workers).slopes;
}

std::vector<double> eta_decay(const NoiseSpec& noise, const TransformSpec& transform,
                              const std::vector<SamplingGrid>& grids, int replications, std::uint64_t master_seed,
                              int workers) {
  if (replications < 1) fail(ErrorCode::validation, "replications must be >= 1");
  std::vector<double> out;
  for (const auto& grid : grids) {
    const CirculantEmbedding embedding(noise, grid);
    std::vector<double> eta2(static_cast<std::size_t>(replications), 0.0);
    parallel_for(replications, workers, [&](int r) {
      const auto xi = embedding.sample(replication_seed(master_seed, static_cast<std::uint64_t>(r)));
      eta2[static_cast<std::size_t>(r)] = std::pow(fourier_sup(subordinate(xi, transform), grid), 2);
    });
    double sum = 0.0;
    for (double e : eta2) sum += e;
    out.push_back(sum / replications);
  }
  return out;
}

}  // namespace hpreg
