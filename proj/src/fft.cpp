#include "nlgrad/fft.hpp"
#include "nlgrad/parallel.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nlgrad {

namespace {

const std::vector<cplx>& twiddles(std::size_t n) {
    static std::map<std::size_t, std::vector<cplx>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cplx> w(n / 2);
    for (std::size_t i = 0; i < n / 2; ++i) {
        double a = -2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        w[i] = {std::cos(a), std::sin(a)};
    }
    return cache.emplace(n, std::move(w)).first->second;
}

// One contiguous length-n transform, forward (sign -1 baked into twiddles).
void fft_line(cplx* a, std::size_t n, bool inverse) {
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const std::vector<cplx>& w = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx tw = w[k * stride];
                if (inverse) tw = std::conj(tw);
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * tw;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

void check_pow2(const std::vector<std::size_t>& shape) {
    for (std::size_t s : shape)
        if (s == 0 || (s & (s - 1)) != 0)
            throw std::invalid_argument("Fft: axis lengths must be powers of two");
}

// Blocked out-of-place transpose of a rows x cols row-major array.
void transpose_blocked(const cplx* src, cplx* dst, std::size_t rows, std::size_t cols) {
    constexpr std::size_t B = 32;
    parallel_for((rows + B - 1) / B, [&](std::size_t bi) {
        std::size_t i0 = bi * B, i1 = std::min(rows, i0 + B);
        for (std::size_t j0 = 0; j0 < cols; j0 += B) {
            std::size_t j1 = std::min(cols, j0 + B);
            for (std::size_t i = i0; i < i1; ++i)
                for (std::size_t j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
        }
    });
}

void transform(std::vector<cplx>& data, const std::vector<std::size_t>& shape, bool inverse) {
    check_pow2(shape);
    std::size_t total = 1;
    for (std::size_t s : shape) total *= s;
    if (data.size() != total) throw std::invalid_argument("Fft: size mismatch");

    const int rank = static_cast<int>(shape.size());
    if (rank == 2) {
        // contiguous rows, transpose, contiguous rows, transpose back
        const std::size_t r = shape[0], c = shape[1];
        parallel_for(r, [&](std::size_t l) { fft_line(&data[l * c], c, inverse); });
        std::vector<cplx> tmp(total);
        transpose_blocked(data.data(), tmp.data(), r, c);
        parallel_for(c, [&](std::size_t l) { fft_line(&tmp[l * r], r, inverse); });
        transpose_blocked(tmp.data(), data.data(), c, r);
    } else {
        // Last axis in place (contiguous), other axes via line gather.
        std::size_t inner = 1;
        for (int axis = rank - 1; axis >= 0; --axis) {
            const std::size_t n = shape[axis];
            const std::size_t lines = total / n;
            if (axis == rank - 1) {
                parallel_for(lines, [&](std::size_t l) { fft_line(&data[l * n], n, inverse); });
            } else {
                const std::size_t stride = inner;
                parallel_for(lines, [&](std::size_t l) {
                    std::size_t block = l / stride;
                    std::size_t off = l % stride;
                    std::size_t base = block * n * stride + off;
                    thread_local std::vector<cplx> line;
                    line.resize(n);
                    for (std::size_t i = 0; i < n; ++i) line[i] = data[base + i * stride];
                    fft_line(line.data(), n, inverse);
                    for (std::size_t i = 0; i < n; ++i) data[base + i * stride] = line[i];
                });
            }
            inner *= n;
        }
    }
    if (inverse) {
        double scale = 1.0 / static_cast<double>(total);
        parallel_for(total, [&](std::size_t i) { data[i] *= scale; });
    }
}

} // namespace

void Fft::forward(std::vector<cplx>& data, const std::vector<std::size_t>& shape) {
    transform(data, shape, false);
}

void Fft::inverse(std::vector<cplx>& data, const std::vector<std::size_t>& shape) {
    transform(data, shape, true);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double fft_frequency(std::size_t m, std::size_t N, double spacing) {
    double idx = (m <= N / 2) ? static_cast<double>(m)
                              : static_cast<double>(m) - static_cast<double>(N);
    return idx / (static_cast<double>(N) * spacing);
}

} // namespace nlgrad
