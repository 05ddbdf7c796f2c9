#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hpreg {

/// Failure categories raised by the library. The CLI maps these onto exit
/// codes (validation-type errors exit 2, experiment failures exit 3).
enum class ErrorCode {
  domain,              // argument outside the documented domain
  overflow,            // result not representable
  singularity,         // evaluation exactly at a spectral singularity
  validation,          // malformed spec, config or input file
  nonconvergence,      // quadrature or iteration did not converge
  mean_nonzero,        // transform violates E G(xi) = 0
  degenerate,          // transform or sample without variance
  size_limit,          // combinatorial enumeration bound exceeded
  embedding_failure,   // circulant embedding not nonnegative definite
  nyquist,             // frequency band reaches the Nyquist limit
  insufficient_peaks,  // fewer admissible periodogram peaks than harmonics
  singular_system,     // normal equations not solvable
  non_integrable,      // alpha_min * k <= 1
  zero_amplitude,      // A^2 + B^2 == 0
  overlap,             // regression atom coincides with a noise singularity
  insufficient_samples,
  experiment_failure,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hpreg
