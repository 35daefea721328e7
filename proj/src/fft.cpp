#include "lmd/fft.hpp"

#include <cmath>
#include <numbers>

#include "lmd/errors.hpp"

namespace lmd {

Fft::Fft(int n) : n_(n) {
    if (n < 1 || (n & (n - 1)) != 0)
        throw ShapeError("fft: size must be a power of two, got " + std::to_string(n));
    bitrev_.resize(n);
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < log2n; ++b)
            if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
        bitrev_[i] = r;
    }
    // Twiddles for each stage, laid out contiguously: stage of half-width m
    // stores m roots exp(-i pi k / m).
    twiddle_.resize(n > 1 ? n - 1 : 0);
    std::size_t off = 0;
    for (int m = 1; m < n; m <<= 1) {
        for (int k = 0; k < m; ++k) {
            const double ang = -std::numbers::pi * k / m;
            twiddle_[off + k] = {std::cos(ang), std::sin(ang)};
        }
        off += m;
    }
}

void Fft::transform(std::complex<double>* a, bool invert) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) {
        const int j = bitrev_[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    std::size_t off = 0;
    for (int m = 1; m < n; m <<= 1) {
        for (int start = 0; start < n; start += 2 * m) {
            for (int k = 0; k < m; ++k) {
                std::complex<double> w = twiddle_[off + k];
                if (invert) w = std::conj(w);
                const std::complex<double> u = a[start + k];
                const std::complex<double> t = w * a[start + k + m];
                a[start + k] = u + t;
                a[start + k + m] = u - t;
            }
        }
        off += m;
    }
}

void Fft::inverse(std::complex<double>* data) const {
    transform(data, true);
    const double scale = 1.0 / n_;
    for (int i = 0; i < n_; ++i) data[i] *= scale;
}

void Fft2::columns(std::complex<double>* data, bool invert) const {
    std::vector<std::complex<double>> col(ny_);
    for (int ix = 0; ix < nx_; ++ix) {
        for (int iy = 0; iy < ny_; ++iy) col[iy] = data[static_cast<std::size_t>(iy) * nx_ + ix];
        if (invert)
            col_.inverse(col.data());
        else
            col_.forward(col.data());
        for (int iy = 0; iy < ny_; ++iy) data[static_cast<std::size_t>(iy) * nx_ + ix] = col[iy];
    }
}

void Fft2::forward(std::complex<double>* data) const {
    for (int iy = 0; iy < ny_; ++iy) row_.forward(data + static_cast<std::size_t>(iy) * nx_);
    columns(data, false);
}

void Fft2::inverse(std::complex<double>* data) const {
    for (int iy = 0; iy < ny_; ++iy) row_.inverse(data + static_cast<std::size_t>(iy) * nx_);
    columns(data, true);
}

} // namespace lmd
