#ifndef NLGRAD_FFT_HPP
#define NLGRAD_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace nlgrad {

using cplx = std::complex<double>;

// In-place radix-2 FFT over the last `rank` axes of a row-major array.
// Forward transform is unnormalized; inverse divides by the total size.
// All axis lengths must be powers of two.
class Fft {
public:
    static void forward(std::vector<cplx>& data, const std::vector<std::size_t>& shape);
    static void inverse(std::vector<cplx>& data, const std::vector<std::size_t>& shape);
};

std::size_t next_pow2(std::size_t n);

// Unnormalized DFT frequency along one axis: index m of N maps to
// m/(N h) for m <= N/2 and (m - N)/(N h) beyond.
double fft_frequency(std::size_t m, std::size_t N, double spacing);

} // namespace nlgrad

#endif
