#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lmd/errors.hpp"
#include "lmd/rng.hpp"

// Minimal reverse-mode autodiff over dense real/complex double tensors. The
// op set is exactly what the surrogate model needs; there is no broadcasting
// beyond it. Complex values are stored interleaved (re, im) and their
// gradients are taken with respect to the real and imaginary parts as
// independent reals.
namespace lmd::ad {

class Tape;

struct Tensor {
    std::vector<int> shape;
    std::shared_ptr<std::vector<double>> data;
    std::shared_ptr<std::vector<double>> grad; // same layout as data when present
    bool complex_vals = false;
    bool requires_grad = false;
    Tape* tape = nullptr;

    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool complex_vals = false);
    static Tensor full(std::vector<int> shape, double value);
    static Tensor from(std::vector<int> shape, std::vector<double> values,
                       bool complex_vals = false);

    std::size_t numel() const; // elements (a complex element counts once)
    std::size_t scalars() const { return numel() * (complex_vals ? 2 : 1); }
    bool defined() const { return static_cast<bool>(data); }

    double& at(std::size_t i) { return (*data)[i]; }
    double at(std::size_t i) const { return (*data)[i]; }

    std::string shape_str() const;
};

// Execution record. Leaves are registered with watch(); every op whose
// inputs carry gradients appends a backward closure. A tape drives exactly
// one backward pass.
class Tape {
public:
    // Marks t as a leaf on this tape and installs a fresh zero gradient.
    void watch(Tensor& t);
    void record(std::function<void()> back) { nodes_.push_back(std::move(back)); }
    void backward_from(Tensor& loss);
    bool consumed() const { return consumed_; }

private:
    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
};

// Convolution padding: plain zeros, or periodic in x with reflection in y
// (the physical boundary conditions of the simulation domain).
enum class PadMode { zero, periodic_x_reflect_y };

// input (Cin,H,W), kernel (Cout,Cin,kh,kw), optional bias (Cout); output
// (Cout,H',W') with H' = (H + 2 pad - kh)/stride + 1.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride, int pad,
              PadMode mode = PadMode::zero);

Tensor down2(const Tensor& input); // 2x2 mean pool, even spatial dims
Tensor up2(const Tensor& input);   // nearest-neighbor duplication

// input (N,din), weight (din,dout), optional bias (dout).
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

Tensor gelu(const Tensor& x);    // exact erf form; complex: per re/im part
Tensor sigmoid(const Tensor& x);
Tensor softmax(const Tensor& x, int axis);
Tensor layernorm(const Tensor& x, const Tensor& scale, const Tensor& shift); // over last dim
Tensor softshrink(const Tensor& x, double lambda);
Tensor add(const Tensor& a, const Tensor& b);
Tensor concat_channels(const Tensor& a, const Tensor& b); // along dim 0 of (C,H,W)

// Unitary 2D Fourier transforms over the trailing two (power-of-two) axes of
// a (C,H,W) tensor. fft2 takes real input; ifft2 returns the real part.
Tensor fft2(const Tensor& x);
Tensor ifft2(const Tensor& x);

// Per-mode block-diagonal complex mixing: X (C,H,W) complex with C split
// into heads of size dh = C/heads, weight (heads,dh,dh) complex shared across
// modes, bias (H,W,heads,dh) complex indexed by mode.
Tensor block_complex_linear(const Tensor& x, const Tensor& weight, const Tensor& bias, int heads);

// Token layout changes between the spatial (C,H,W) and token-major (H*W, C)
// views used by layernorm and the MLP.
Tensor chw_to_nc(const Tensor& x);
Tensor nc_to_chw(const Tensor& x, int h, int w);

// Mean squared error over all entries (real tensors).
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// Reverse pass from a scalar loss. Using a tape twice is a lifecycle error.
void backward(Tensor& loss);

struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m, v;
};

// Bias-corrected Adam update; params are modified in place from their
// gradient slots. The state's moment buffers are allocated on first use.
void adam_step(std::vector<Tensor*>& params, AdamState& state);

// Deterministic parameter fills used by model initialization.
void fill_uniform(Tensor& t, Rng& rng, double lo, double hi);

} // namespace lmd::ad
