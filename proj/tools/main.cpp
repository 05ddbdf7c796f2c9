// hpreg command-line front end.
//
// Exit codes: 0 success, 2 invalid input (bad flags, configs, data or
// parameters outside the theory), 3 experiment or numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "hpreg/asymptotics.hpp"
#include "hpreg/config.hpp"
#include "hpreg/csv.hpp"
#include "hpreg/diagrams.hpp"
#include "hpreg/errors.hpp"
#include "hpreg/estimator.hpp"
#include "hpreg/harness.hpp"
#include "hpreg/simulate.hpp"

namespace fs = std::filesystem;
using namespace hpreg;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitFailure = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 0;
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::experiment_failure:
    case ErrorCode::nonconvergence:
    case ErrorCode::insufficient_peaks:
    case ErrorCode::singular_system:
    case ErrorCode::embedding_failure:
    case ErrorCode::size_limit:
    case ErrorCode::overflow:
      return kExitFailure;
    default:
      return kExitValidation;
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << text;
}

std::vector<double> parse_band(const std::string& text) {
  const auto band = parse_double_list(text, "--band");
  if (band.size() != 2) fail(ErrorCode::validation, "--band expects lo,hi");
  return band;
}

TransformSpec load_transform(const std::string& path) {
  return TransformSpec::from_config(ConfigDocument::load(path), fs::path(path).parent_path());
}

std::string estimation_text(const EstimationResult& r) {
  std::ostringstream os;
  os << "harmonics = " << r.estimate.size() << "\n";
  os << "converged = " << (r.converged ? "true" : "false") << "\n";
  os << "iterations = " << r.iterations << "\n";
  os << "objective = " << format_double(r.objective) << "\n";
  os << "initial_objective = " << format_double(r.initial_objective) << "\n";
  os << "gradient_norm = " << format_double(r.gradient_norm) << "\n";
  os << "grid_resolution = " << format_double(r.grid_resolution) << "\n";
  os << "decoupled_amplitudes = " << (r.decoupled_amplitudes ? "true" : "false") << "\n";
  for (const auto& w : r.warnings) os << "warning = " << w << "\n";
  for (std::size_t k = 0; k < r.estimate.size(); ++k) {
    os << "\n[harmonic]\n";
    os << "A = " << format_double(r.estimate[k].a) << "\n";
    os << "B = " << format_double(r.estimate[k].b) << "\n";
    os << "phi = " << format_double(r.estimate[k].frequency) << "\n";
    if (k < r.normalized_errors.size()) {
      const auto& e = r.normalized_errors[k];
      os << "normalized_error = " << format_double(e[0]) << ", " << format_double(e[1]) << ", "
         << format_double(e[2]) << "\n";
    }
  }
  return os.str();
}

Eigen::MatrixXd load_correlation(const std::string& path, std::size_t p) {
  const auto doc = ConfigDocument::load(path);
  const auto rows = doc.blocks("row");
  if (rows.size() != p) {
    fail(ErrorCode::validation, path + ": expected " + std::to_string(p) + " [row] blocks, found " +
                                    std::to_string(rows.size()));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    const auto values = rows[i]->get_list("values");
    if (values.size() != p) fail(ErrorCode::validation, path + ": row " + std::to_string(i + 1) + " has wrong length");
    for (std::size_t j = 0; j < p; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[j];
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic regression with subordinated Gaussian noise: simulation, estimation, limit theory"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand; set before subcommands inherit it
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output file (simulate) or directory (other subcommands)");
  app.add_option("--workers", g.workers, "Worker threads for montecarlo (default: hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  std::string model_path, noise_path, transform_path, input_path, truth_path, band_text, mode_text = "derived",
                                                                                           config_path,
                                                                                           corr_path, orders_text;
  double horizon = 0.0, step = 0.25;
  bool approximate = false, allow_weak = false;
  std::size_t n_harmonics = 1;
  int truncation = kDefaultTruncation;

  auto* sim = app.add_subcommand("simulate", "Simulate x(t) = g(t) + G(xi(t)) and write t,x,signal,noise CSV");
  sim->add_option("--model", model_path, "Harmonic model config")->required();
  sim->add_option("--noise", noise_path, "Noise spec config")->required();
  sim->add_option("--transform", transform_path, "Transform config")->required();
  sim->add_option("--horizon", horizon, "Observation horizon T")->required();
  sim->add_option("--step", step, "Sampling step");
  sim->add_flag("--approximate", approximate, "Clamp negative circulant eigenvalues instead of failing");
  sim->add_flag("--allow-weak-dependence", allow_weak, "Downgrade alpha_min * m <= 1 to a warning");

  auto* est = app.add_subcommand("estimate", "Estimate N harmonics from a t,x CSV");
  est->add_option("--input", input_path, "CSV with header t,x[,signal,noise]")->required();
  est->add_option("--n-harmonics", n_harmonics, "Number of harmonics N")->required();
  est->add_option("--band", band_text, "Frequency band lo,hi")->required();
  est->add_option("--truth", truth_path, "True model config; adds normalized errors");

  auto* asy = app.add_subcommand("asymptotics", "Limit covariance blocks of the estimator");
  asy->add_option("--model", model_path, "Harmonic model config")->required();
  asy->add_option("--noise", noise_path, "Noise spec config")->required();
  asy->add_option("--transform", transform_path, "Transform config")->required();
  asy->add_option("--mode", mode_text, "derived|as-printed");
  asy->add_option("--truncation", truncation, "Hermite truncation order J_max");

  auto* mc = app.add_subcommand("montecarlo", "Run a Monte Carlo experiment");
  mc->add_option("--config", config_path, "Experiment config")->required();

  auto* mom = app.add_subcommand("moments", "Hermite product moment and diagram census");
  mom->add_option("--orders", orders_text, "Hermite orders l_1,...,l_p")->required();
  mom->add_option("--correlation", corr_path, "Correlation matrix config ([row] blocks with key values)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (sim->parsed()) {
      const auto model = HarmonicModel::from_config(ConfigDocument::load(model_path));
      const auto noise = NoiseSpec::from_config(ConfigDocument::load(noise_path));
      ObserveOptions options;
      options.allow_weak_dependence_violation = allow_weak;
      options.approximate_embedding = approximate;
      const auto path =
          observe(model, noise, load_transform(transform_path), SamplingGrid::make(horizon, step), g.seed.value_or(0), options);
      for (const auto& w : path.warnings) std::cerr << "warning: " << w << "\n";
      const auto text = path.to_csv().to_string();
      if (g.out.empty()) {
        std::cout << text;
      } else {
        write_file(g.out, text);
      }
    } else if (est->parsed()) {
      const auto band = parse_band(band_text);
      const auto path = SamplePath::from_csv(CsvTable::load(input_path));
      auto result = estimate(path, n_harmonics, band[0], band[1]);
      std::optional<HarmonicModel> truth;
      if (!truth_path.empty()) {
        truth = HarmonicModel::from_config(ConfigDocument::load(truth_path));
        attach_normalized_errors(result, *truth, path.grid.horizon);
      }
      const auto text = estimation_text(result);
      std::cout << text;
      if (!g.out.empty()) {
        write_file(fs::path(g.out) / "estimate.txt", text);
        if (truth) {
          std::vector<std::vector<double>> cols(4);
          for (std::size_t k = 0; k < result.normalized_errors.size(); ++k) {
            cols[0].push_back(static_cast<double>(k + 1));
            for (int c = 0; c < 3; ++c) cols[static_cast<std::size_t>(c + 1)].push_back(result.normalized_errors[k][static_cast<std::size_t>(c)]);
          }
          CsvTable({"harmonic", "dA", "dB", "dphi"}, cols).save(fs::path(g.out) / "normalized_errors.csv");
        }
      }
    } else if (asy->parsed()) {
      const auto model = HarmonicModel::from_config(ConfigDocument::load(model_path));
      const auto noise = NoiseSpec::from_config(ConfigDocument::load(noise_path));
      const auto report =
          gamma_report(model.harmonics(), expand(load_transform(transform_path)), noise, truncation, parse_gamma_mode(mode_text));
      std::cout << report.to_text();
      if (!g.out.empty()) {
        write_file(fs::path(g.out) / "gamma.txt", report.to_text());
        report.to_csv().save(fs::path(g.out) / "gamma.csv");
      }
    } else if (mc->parsed()) {
      auto config = ExperimentConfig::load(config_path);
      if (g.seed) config.master_seed = *g.seed;
      if (!g.out.empty()) config.output_dir = g.out;
      const int workers = g.workers > 0 ? g.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
      const auto report = run_replications(config, workers);
      if (config.output_dir.empty()) {
        std::cout << report.to_text();
      } else {
        report.write(config.output_dir);
        std::cout << "wrote " << (config.output_dir / "report.txt").string() << "\n";
      }
    } else if (mom->parsed()) {
      std::vector<int> orders;
      for (double v : parse_double_list(orders_text, "--orders")) {
        if (v != std::floor(v) || v < 0) fail(ErrorCode::validation, "--orders must be non-negative integers");
        orders.push_back(static_cast<int>(v));
      }
      std::ostringstream os;
      os << "orders = " << orders_text << "\n";
      const auto c = census(orders);
      os << "diagrams = " << c.total << "\n";
      os << "regular_diagrams = " << c.regular << "\n";
      try {
        os << "regular_formula = " << count_regular_for_orders(orders) << "\n";
      } catch (const Error& e) {
        os << "regular_formula = n/a (" << e.what() << ")\n";
      }
      if (!corr_path.empty()) {
        os << "moment = " << format_double(hermite_product_moment(orders, load_correlation(corr_path, orders.size())))
           << "\n";
      }
      std::cout << os.str();
      if (!g.out.empty()) write_file(fs::path(g.out) / "moments.txt", os.str());
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
