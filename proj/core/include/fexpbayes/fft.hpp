#pragma once

#include <complex>
#include <vector>

namespace fexpbayes {

// In-place radix-2 FFT. a.size() must be a power of two.
// inverse=true applies the unnormalized inverse transform; divide by N
// yourself if you need the unitary pair.
void fft(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

}  // namespace fexpbayes
