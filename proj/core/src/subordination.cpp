#include "hpreg/subordination.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "hpreg/csv.hpp"
#include "hpreg/errors.hpp"

namespace hpreg {
namespace {

constexpr double kCoefficientTolerance = 1e-9;
constexpr double kMeanTolerance = 1e-8;
// Beyond |x| = 38 the standard normal density underflows.
constexpr double kSupport = 38.0;

double inv_sqrt_factorial(int k) { return std::exp(-0.5 * std::lgamma(k + 1.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Composite 30-point Gauss-Legendre rule against the normal density on
// panels of width h, with every breakpoint of G a panel edge.
QuadratureRule panel_rule(const std::vector<double>& breakpoints, double h) {
  std::vector<double> edges;
  for (double x = -kSupport; x <= kSupport + 1e-12; x += h) edges.push_back(x);
  for (double b : breakpoints) {
    if (b > -kSupport && b < kSupport) edges.push_back(b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              edges.end());
  using GL = boost::math::quadrature::gauss<double, 30>;
  const auto& abscissa = GL::abscissa();
  const auto& weights = GL::weights();
  QuadratureRule rule;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    const double half = 0.5 * (edges[i + 1] - edges[i]);
    for (std::size_t j = 0; j < abscissa.size(); ++j) {
      for (double sign : {-1.0, 1.0}) {
        if (abscissa[j] == 0.0 && sign > 0) continue;
        const double x = mid + sign * half * abscissa[j];
        rule.nodes.push_back(x);
        rule.weights.push_back(half * weights[j] * normal_pdf(x));
      }
    }
  }
  return rule;
}

std::vector<double> project(const TransformSpec& g, const QuadratureRule& rule, int kmax) {
  std::vector<double> c(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double gx = g(rule.nodes[i]) * rule.weights[i];
    if (gx == 0.0) continue;
    const auto h = hermite_all(kmax, rule.nodes[i]);
    for (int k = 0; k <= kmax; ++k) c[k] += gx * h[k];
  }
  return c;
}

double max_scaled_change(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a[k] - b[k]) * inv_sqrt_factorial(static_cast<int>(k)));
  }
  return worst;
}

void check_kmax(int kmax) {
  if (kmax < 1 || kmax > kMaxHermiteOrder) {
    fail(ErrorCode::validation, "kmax must lie in [1, 60], got " + std::to_string(kmax));
  }
}

}  // namespace

double hermite(int k, double x) {
  if (k < 0) fail(ErrorCode::domain, "hermite: negative order");
  if (k > kMaxHermiteOrder) fail(ErrorCode::overflow, "hermite: order above 60");
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = x;
  for (int j = 1; j < k; ++j) {
    const double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_all(int kmax, double x) {
  if (kmax < 0) fail(ErrorCode::domain, "hermite: negative order");
  if (kmax > kMaxHermiteOrder) fail(ErrorCode::overflow, "hermite: order above 60");
  std::vector<double> h(static_cast<std::size_t>(kmax) + 1);
  h[0] = 1.0;
  if (kmax >= 1) h[1] = x;
  for (int j = 1; j < kmax; ++j) h[j + 1] = x * h[j] - j * h[j - 1];
  return h;
}

const QuadratureRule& gauss_hermite(int n) {
  if (n < 1 || n > 1024) fail(ErrorCode::domain, "gauss_hermite: node count outside [1, 1024]");
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(solver.eigenvalues()(i));
    const double v = solver.eigenvectors()(0, i);
    rule.weights.push_back(v * v);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

TransformSpec TransformSpec::identity() { return TransformSpec{}; }

TransformSpec TransformSpec::hermite(std::vector<double> coeffs) {
  if (coeffs.empty()) fail(ErrorCode::validation, "hermite transform needs coefficients");
  if (coeffs.size() > kMaxHermiteOrder + 1) fail(ErrorCode::validation, "hermite transform order above 60");
  for (double c : coeffs) {
    if (!std::isfinite(c)) fail(ErrorCode::validation, "hermite coefficient not finite");
  }
  TransformSpec t;
  t.kind_ = TransformKind::hermite;
  t.coeffs_ = std::move(coeffs);
  t.kmax_ = std::max(t.kmax_, static_cast<int>(t.coeffs_.size()) - 1);
  return t;
}

TransformSpec TransformSpec::centered_abs() {
  TransformSpec t;
  t.kind_ = TransformKind::centered_abs;
  return t;
}

TransformSpec TransformSpec::cube() {
  TransformSpec t;
  t.kind_ = TransformKind::cube;
  return t;
}

TransformSpec TransformSpec::table(std::vector<double> xs, std::vector<double> gs) {
  if (xs.size() != gs.size() || xs.size() < 2) {
    fail(ErrorCode::validation, "transform table needs >= 2 (x, G) pairs");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(gs[i])) fail(ErrorCode::validation, "transform table value not finite");
    if (i > 0 && !(xs[i] > xs[i - 1])) fail(ErrorCode::validation, "transform table x must be strictly increasing");
  }
  TransformSpec t;
  t.kind_ = TransformKind::table;
  t.xs_ = std::move(xs);
  t.gs_ = std::move(gs);
  return t;
}

TransformSpec& TransformSpec::set_kmax(int kmax) {
  check_kmax(kmax);
  kmax_ = kmax;
  return *this;
}

bool TransformSpec::is_polynomial() const noexcept {
  return kind_ == TransformKind::identity || kind_ == TransformKind::hermite ||
         kind_ == TransformKind::cube;
}

std::vector<double> TransformSpec::breakpoints() const {
  switch (kind_) {
    case TransformKind::centered_abs: return {0.0};
    case TransformKind::table: return xs_;
    default: return {};
  }
}

double TransformSpec::operator()(double x) const {
  switch (kind_) {
    case TransformKind::identity: return x;
    case TransformKind::cube: return x * x * x;
    case TransformKind::centered_abs: return std::abs(x) - std::sqrt(2.0 / std::numbers::pi);
    case TransformKind::hermite: {
      const int order = static_cast<int>(coeffs_.size()) - 1;
      const auto h = hermite_all(order, x);
      double sum = 0.0;
      double factorial = 1.0;
      for (int k = 0; k <= order; ++k) {
        if (k > 0) factorial *= k;
        sum += coeffs_[k] * h[k] / factorial;
      }
      return sum;
    }
    case TransformKind::table: {
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      std::size_t i = static_cast<std::size_t>(it - xs_.begin());
      i = std::clamp<std::size_t>(i, 1, xs_.size() - 1);
      const double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
      return gs_[i - 1] + w * (gs_[i] - gs_[i - 1]);
    }
  }
  return 0.0;
}

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::identity: return "identity";
    case TransformKind::hermite: return "hermite";
    case TransformKind::centered_abs: return "abs";
    case TransformKind::cube: return "cube";
    case TransformKind::table: return "table";
  }
  return "?";
}

TransformSpec TransformSpec::from_config(const ConfigDocument& doc, const std::filesystem::path& base_dir) {
  const auto& root = doc.root();
  const auto kind = root.get("kind");
  TransformSpec t;
  if (kind == "identity") {
    t = identity();
  } else if (kind == "hermite") {
    t = hermite(root.get_list("coeffs"));
  } else if (kind == "abs" || kind == "centered_abs") {
    t = centered_abs();
  } else if (kind == "cube") {
    t = cube();
  } else if (kind == "table") {
    if (root.has("table")) {
      std::filesystem::path path = root.get("table");
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      const auto csv = CsvTable::load(path);
      t = table(csv.column("x"), csv.column("G"));
      t.table_path_ = root.get("table");
    } else {
      t = table(root.get_list("table_x"), root.get_list("table_g"));
    }
  } else {
    fail(ErrorCode::validation, doc.origin() + ": unknown transform kind '" + kind + "'");
  }
  if (root.has("kmax")) t.set_kmax(static_cast<int>(root.get_int("kmax")));
  return t;
}

std::string TransformSpec::to_config() const {
  auto list = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s + "]";
  };
  std::string out = "kind = " + to_string(kind_) + "\n";
  if (kind_ == TransformKind::hermite) out += "coeffs = " + list(coeffs_) + "\n";
  if (kind_ == TransformKind::table) {
    out += "table_x = " + list(xs_) + "\n";
    out += "table_g = " + list(gs_) + "\n";
  }
  out += "kmax = " + std::to_string(kmax_) + "\n";
  return out;
}

double gaussian_expectation(const TransformSpec& g, int power) {
  const QuadratureRule rule = g.is_polynomial() ? gauss_hermite(256) : panel_rule(g.breakpoints(), 0.125);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * std::pow(g(rule.nodes[i]), power);
  }
  return sum;
}

std::vector<double> hermite_coefficients(const TransformSpec& g, int kmax) {
  check_kmax(kmax);
  std::vector<double> previous;
  std::vector<double> current;
  bool converged = false;
  if (g.is_polynomial()) {
    for (int n = 64; n <= 512; n *= 2) {
      current = project(g, gauss_hermite(n), kmax);
      if (!previous.empty() && max_scaled_change(previous, current) <= kCoefficientTolerance) {
        converged = true;
        break;
      }
      previous = current;
    }
  } else {
    for (double h = 1.0; h >= 1.0 / 64; h /= 2) {
      current = project(g, panel_rule(g.breakpoints(), h), kmax);
      if (!previous.empty() && max_scaled_change(previous, current) <= kCoefficientTolerance) {
        converged = true;
        break;
      }
      previous = current;
    }
  }
  if (!converged) fail(ErrorCode::nonconvergence, "hermite coefficients did not settle under node doubling");
  if (std::abs(current[0]) > kMeanTolerance) {
    fail(ErrorCode::mean_nonzero, "transform has nonzero Gaussian mean C_0 = " + format_double(current[0]));
  }
  current[0] = 0.0;
  return current;
}

int hermite_rank(const std::vector<double>& coeffs, double tol) {
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    if (std::abs(coeffs[k]) * inv_sqrt_factorial(static_cast<int>(k)) > tol) return static_cast<int>(k);
  }
  fail(ErrorCode::degenerate, "all Hermite coefficients below tolerance");
}

HermiteExpansion expand(const TransformSpec& g) {
  HermiteExpansion e;
  e.coeffs = hermite_coefficients(g, g.kmax());
  e.rank = hermite_rank(e.coeffs);
  e.second_moment = gaussian_expectation(g, 2);
  e.fourth_moment = gaussian_expectation(g, 4);
  if (!std::isfinite(e.fourth_moment)) fail(ErrorCode::validation, "transform has infinite fourth moment");
  for (std::size_t k = 1; k < e.coeffs.size(); ++k) {
    e.partial_sum += e.coeffs[k] * e.coeffs[k] * std::exp(-std::lgamma(k + 1.0));
  }
  return e;
}

double subordinated_covariance_at(const std::vector<double>& coeffs, double b) {
  double sum = 0.0;
  double power = 1.0;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    power *= b;
    if (coeffs[k] == 0.0) continue;
    sum += coeffs[k] * coeffs[k] * std::exp(-std::lgamma(k + 1.0)) * power;
  }
  return sum;
}

double subordinated_covariance(const std::vector<double>& coeffs, const NoiseSpec& spec, double t) {
  return subordinated_covariance_at(coeffs, covariance(spec, t));
}

}  // namespace hpreg
