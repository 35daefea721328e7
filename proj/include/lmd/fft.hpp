#pragma once

#include <complex>
#include <vector>

namespace lmd {

// Radix-2 FFT for the power-of-two sizes this project guarantees. Forward is
// unnormalized; inverse carries the 1/n factor, so inverse(forward(x)) == x.
// Plans precompute twiddles and the bit-reversal permutation; transforms are
// bit-deterministic for a given size.
class Fft {
public:
    explicit Fft(int n);

    void forward(std::complex<double>* data) const { transform(data, false); }
    void inverse(std::complex<double>* data) const;
    int size() const { return n_; }

private:
    void transform(std::complex<double>* data, bool invert) const;

    int n_ = 0;
    std::vector<int> bitrev_;
    std::vector<std::complex<double>> twiddle_; // per-stage roots, forward sign
};

// In-place 2D transforms on a row-major ny x nx complex array. Forward is
// unnormalized, inverse applies 1/(nx*ny).
class Fft2 {
public:
    Fft2(int ny, int nx) : row_(nx), col_(ny), ny_(ny), nx_(nx) {}

    void forward(std::complex<double>* data) const;
    void inverse(std::complex<double>* data) const;
    int ny() const { return ny_; }
    int nx() const { return nx_; }

private:
    void columns(std::complex<double>* data, bool invert) const;

    Fft row_;
    Fft col_;
    int ny_, nx_;
};

} // namespace lmd
