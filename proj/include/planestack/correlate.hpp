#pragma once

#include <span>
#include <vector>

#include "planestack/raster.hpp"

namespace planestack {

enum class CorrelationMethod { Auto, Direct, Fft };

/// Sum over planes of the valid (no padding) cross-correlation with one side x side kernel each,
/// plus a constant:
///   out(r, c) = offset + sum_k sum_{i,j} kernel_k[i * side + j] * plane_k(r + i, c + j)
/// Output is (H - side + 1) x (W - side + 1). Auto picks the FFT route for large problems;
/// both routes agree to floating-point rounding.
RealPlane correlate_valid(std::span<const BinaryPlane> planes,
                          std::span<const std::span<const double>> kernels, int side,
                          double offset, CorrelationMethod method = CorrelationMethod::Auto,
                          int threads = 1);

/// Smallest n' >= n whose only prime factors are 2, 3, 5, 7.
int fft_friendly_size(int n);

}  // namespace planestack
