#include "hpreg/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "hpreg/errors.hpp"

namespace hpreg::fft {
namespace {

// The FFTW planner is not reentrant; plan execution is. Plans are made
// alignment-independent so results never depend on allocation addresses.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void transform(ComplexVector& data, int sign) {
  if (data.empty()) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (plan == nullptr) fail(ErrorCode::nonconvergence, "FFTW could not create a plan");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

void forward(ComplexVector& data) { transform(data, FFTW_FORWARD); }

void backward(ComplexVector& data) { transform(data, FFTW_BACKWARD); }

ComplexVector real_forward(std::span<const double> input, std::size_t n) {
  if (n < input.size()) fail(ErrorCode::domain, "real_forward: n shorter than input");
  std::vector<double> buffer(n, 0.0);
  std::copy(input.begin(), input.end(), buffer.begin());
  ComplexVector out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), buffer.data(),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (plan == nullptr) fail(ErrorCode::nonconvergence, "FFTW could not create a plan");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
  return out;
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace hpreg::fft
