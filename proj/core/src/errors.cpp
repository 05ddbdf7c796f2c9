#include "hpreg/errors.hpp"

namespace hpreg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::singularity: return "singularity";
    case ErrorCode::validation: return "validation";
    case ErrorCode::nonconvergence: return "nonconvergence";
    case ErrorCode::mean_nonzero: return "mean-nonzero";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::size_limit: return "size-limit";
    case ErrorCode::embedding_failure: return "embedding-failure";
    case ErrorCode::nyquist: return "nyquist";
    case ErrorCode::insufficient_peaks: return "insufficient-peaks";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::non_integrable: return "non-integrable";
    case ErrorCode::zero_amplitude: return "zero-amplitude";
    case ErrorCode::overlap: return "overlap";
    case ErrorCode::insufficient_samples: return "insufficient-samples";
    case ErrorCode::experiment_failure: return "experiment-failure";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace hpreg
