#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace nisekit::fft {

// Conventions match the ones the transforms in this project are written
// against (NumPy-style): forward is the negative-exponent sum without
// normalization, inverse carries the 1/N factor. Arbitrary lengths allowed.

std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& in);
std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& in);

std::vector<std::complex<double>> forward_real(const std::vector<double>& in);

}  // namespace nisekit::fft
