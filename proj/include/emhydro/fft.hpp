#pragma once

// Thin FFTW wrapper for 3-D complex transforms with plan caching.
// Plans use FFTW_ESTIMATE so results are reproducible run to run.

#include <complex>
#include <vector>

#include "emhydro/fields.hpp"

namespace emhydro::fft {

// In-place forward/backward c2c transform of a z-fastest array. The backward
// transform divides by the total point count so forward+backward is identity.
void forward(const fields::GridSpec& g, std::vector<std::complex<double>>& data);
void backward(const fields::GridSpec& g, std::vector<std::complex<double>>& data);

}  // namespace emhydro::fft
