#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hpreg::fft {

using ComplexVector = std::vector<std::complex<double>>;

/// In-place unnormalized DFT, X_k = sum_j x_j exp(-2 pi i jk / n).
void forward(ComplexVector& data);

/// In-place unnormalized inverse DFT (sign +1, no 1/n factor).
void backward(ComplexVector& data);

/// DFT of real input zero-padded to length n; returns the n/2 + 1
/// non-negative-frequency bins.
ComplexVector real_forward(std::span<const double> input, std::size_t n);

/// Smallest power of two >= n.
std::size_t next_power_of_two(std::size_t n);

}  // namespace hpreg::fft
