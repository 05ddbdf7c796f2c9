#include "hpreg/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "hpreg/errors.hpp"

namespace hpreg::quad {
namespace {

namespace bq = boost::math::quadrature;

// Rule objects cache node tables; one per thread keeps them lock-free.
bq::tanh_sinh<double>& tanh_sinh_rule() {
  thread_local bq::tanh_sinh<double> rule(15);
  return rule;
}

bq::exp_sinh<double>& exp_sinh_rule() {
  thread_local bq::exp_sinh<double> rule(12);
  return rule;
}

template <typename Fn>
Estimate guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const std::domain_error& e) {
    fail(ErrorCode::nonconvergence, std::string(what) + ": " + e.what());
  } catch (const boost::math::evaluation_error& e) {
    fail(ErrorCode::nonconvergence, std::string(what) + ": " + e.what());
  }
}

}  // namespace

Estimate finite(const Integrand& f, double a, double b, double tol) {
  if (a == b) return {};
  if (a > b) {
    auto r = finite(f, b, a, tol);
    return {-r.value, r.error};
  }
  return guarded("tanh-sinh", [&] {
    double err = 0.0;
    double l1 = 0.0;
    const double v = tanh_sinh_rule().integrate([&f](double x) { return f(x); }, a, b, tol, &err, &l1);
    return Estimate{v, err * std::max(1.0, l1)};
  });
}

Estimate half_line(const Integrand& f, double a, double tol) {
  return guarded("exp-sinh", [&] {
    double err = 0.0;
    double l1 = 0.0;
    const double v =
        exp_sinh_rule().integrate([&f](double x) { return f(x); }, a, std::numeric_limits<double>::infinity(), tol, &err, &l1);
    return Estimate{v, err * std::max(1.0, l1)};
  });
}

Estimate cosine_transform(const Integrand& f, double omega, double tol) {
  omega = std::abs(omega);
  if (omega == 0.0) return half_line(f, 0.0, tol);
  thread_local std::map<double, bq::ooura_fourier_cos<double>> rules;
  auto it = rules.find(tol);
  if (it == rules.end()) it = rules.emplace(tol, bq::ooura_fourier_cos<double>(tol, 8)).first;
  auto& rule = it->second;
  return guarded("ooura cosine transform", [&] {
    auto [v, err] = rule.integrate([&f](double x) { return f(x); }, omega);
    return Estimate{v, std::abs(err * v)};
  });
}

}  // namespace hpreg::quad
