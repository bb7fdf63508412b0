#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace scatlimit::fft {

using cplx = std::complex<double>;

// Real-to-complex transform of length n (output n/2+1 bins), unnormalized:
// X_k = Σ_m x_m e^{-2πi km/n}.
void forward(std::span<const double> in, std::span<cplx> out);

// Inverse of `forward`, including the 1/n factor. The input is not modified.
void inverse(std::span<const cplx> in, std::span<double> out);

std::vector<cplx> forward(std::span<const double> in);
std::vector<double> inverse(std::span<const cplx> in, std::size_t n);

// Complex-to-complex transforms, unnormalized in both directions.
void forward_c2c(std::span<const cplx> in, std::span<cplx> out);
void backward_c2c(std::span<const cplx> in, std::span<cplx> out);

bool is_power_of_two(std::size_t n);

}  // namespace scatlimit::fft
