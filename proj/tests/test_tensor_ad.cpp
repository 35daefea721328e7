#include <doctest.h>

#include <cmath>

#include "lmd/tensor.hpp"
#include "support.hpp"

using namespace lmd;
using ad::Tensor;

namespace {

// Universal checker: records gradients of make_loss() w.r.t. params, then
// compares sampled entries against central finite differences (h = 1e-6).
template <typename F>
double check_gradients(std::vector<Tensor*> params, F&& make_loss, int max_samples = 48,
                       double h = 1e-6) {
    ad::Tape tape;
    for (auto* p : params) tape.watch(*p);
    Tensor loss = make_loss();
    ad::backward(loss);
    std::vector<std::vector<double>> grads;
    for (auto* p : params) grads.push_back(*p->grad);
    for (auto* p : params) {
        p->tape = nullptr;
        p->requires_grad = false;
        p->grad.reset();
    }
    double worst = 0.0;
    Rng rng(1234);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& data = *params[pi]->data;
        const std::size_t n = data.size();
        const std::size_t m = std::min<std::size_t>(max_samples, n);
        for (std::size_t s = 0; s < m; ++s) {
            const std::size_t k = n <= static_cast<std::size_t>(max_samples) ? s : rng() % n;
            const double orig = data[k];
            data[k] = orig + h;
            const double lp = make_loss().at(0);
            data[k] = orig - h;
            const double lm = make_loss().at(0);
            data[k] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = grads[pi][k];
            const double scale = std::max(std::abs(fd), std::abs(an));
            if (scale < 1e-10) continue;
            worst = std::max(worst, std::abs(fd - an) / scale);
        }
    }
    return worst;
}

Tensor random_tensor(std::vector<int> shape, Rng& rng, bool complex_vals = false) {
    Tensor t = Tensor::zeros(std::move(shape), complex_vals);
    ad::fill_uniform(t, rng, -1.0, 1.0);
    return t;
}

// Scalar probe: mean of squares keeps every entry in play.
Tensor sum_sq(const Tensor& t) { return ad::mse_loss(t, Tensor::zeros(t.shape)); }

} // namespace

TEST_CASE("conv2d: identity kernel, box kernel, padding modes") {
    Rng rng(1);
    Tensor x = random_tensor({2, 4, 4}, rng);
    Tensor ident = Tensor::zeros({2, 2, 1, 1});
    (*ident.data)[0] = 1.0; // out0 <- in0
    (*ident.data)[3] = 1.0; // out1 <- in1
    Tensor y = ad::conv2d(x, ident, {}, 1, 0);
    CHECK(*y.data == *x.data);

    Tensor ones_in = Tensor::full({1, 5, 5}, 1.0);
    Tensor box = Tensor::full({1, 1, 3, 3}, 1.0);
    Tensor z = ad::conv2d(ones_in, box, {}, 1, 1);
    CHECK(z.at(1 * 5 + 1) == doctest::Approx(9.0)); // interior
    CHECK(z.at(0) == doctest::Approx(4.0));         // zero-padded corner
    Tensor zp = ad::conv2d(ones_in, box, {}, 1, 1, ad::PadMode::periodic_x_reflect_y);
    for (std::size_t i = 0; i < zp.numel(); ++i) CHECK(zp.at(i) == doctest::Approx(9.0));

    CHECK_THROWS_AS(ad::conv2d(x, Tensor::zeros({2, 3, 3, 3}), {}, 1, 1), ShapeError);
}

TEST_CASE("conv2d gradients (both padding modes)") {
    Rng rng(2);
    for (auto mode : {ad::PadMode::zero, ad::PadMode::periodic_x_reflect_y}) {
        Tensor x = random_tensor({2, 4, 4}, rng);
        Tensor k = random_tensor({3, 2, 3, 3}, rng);
        Tensor b = random_tensor({3}, rng);
        const double err = check_gradients({&x, &k, &b}, [&] {
            return sum_sq(ad::conv2d(x, k, b, 1, 1, mode));
        });
        CHECK(err < 1e-5);
    }
}

TEST_CASE("down2 and up2: values and gradients") {
    Tensor c = Tensor::full({1, 4, 4}, 3.5);
    for (std::size_t i = 0; i < ad::down2(c).numel(); ++i)
        CHECK(ad::down2(c).at(i) == doctest::Approx(3.5));
    for (std::size_t i = 0; i < ad::up2(c).numel(); ++i)
        CHECK(ad::up2(c).at(i) == doctest::Approx(3.5));

    Tensor checker = Tensor::zeros({1, 4, 4});
    for (int iy = 0; iy < 4; ++iy)
        for (int ix = 0; ix < 4; ++ix) (*checker.data)[iy * 4 + ix] = (iy + ix) % 2;
    Tensor pooled = ad::down2(checker);
    for (std::size_t i = 0; i < pooled.numel(); ++i) CHECK(pooled.at(i) == doctest::Approx(0.5));

    // up2 then down2 restores any field exactly (mean of four copies).
    Rng rng(3);
    Tensor x = random_tensor({2, 4, 4}, rng);
    Tensor round = ad::down2(ad::up2(x));
    for (std::size_t i = 0; i < x.scalars(); ++i)
        CHECK(round.at(i) == doctest::Approx(x.at(i)).epsilon(1e-15));

    CHECK_THROWS_AS(ad::down2(Tensor::zeros({1, 3, 4})), ShapeError);

    Tensor g = random_tensor({2, 4, 4}, rng);
    CHECK(check_gradients({&g}, [&] { return sum_sq(ad::down2(g)); }) < 1e-5);
    CHECK(check_gradients({&g}, [&] { return sum_sq(ad::up2(g)); }) < 1e-5);
}

TEST_CASE("linear: identity, bias broadcast, gradients") {
    Rng rng(4);
    Tensor x = random_tensor({3, 4}, rng);
    Tensor eye = Tensor::zeros({4, 4});
    for (int i = 0; i < 4; ++i) (*eye.data)[i * 4 + i] = 1.0;
    Tensor y = ad::linear(x, eye, {});
    CHECK(*y.data == *x.data);

    Tensor zero_w = Tensor::zeros({4, 2});
    Tensor b = random_tensor({2}, rng);
    Tensor yb = ad::linear(x, zero_w, b);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) CHECK(yb.at(r * 2 + c) == doctest::Approx(b.at(c)));

    Tensor w = random_tensor({4, 5}, rng);
    Tensor bias = random_tensor({5}, rng);
    CHECK(check_gradients({&x, &w, &bias}, [&] { return sum_sq(ad::linear(x, w, bias)); }) <
          1e-5);
}

TEST_CASE("gelu: values, far tail, gradient") {
    Tensor zero = Tensor::zeros({1});
    CHECK(ad::gelu(zero).at(0) == 0.0);
    Tensor ten = Tensor::full({1}, 10.0);
    CHECK(ad::gelu(ten).at(0) == doctest::Approx(10.0).epsilon(1e-9));

    Rng rng(5);
    Tensor x = random_tensor({2, 3}, rng);
    CHECK(check_gradients({&x}, [&] { return sum_sq(ad::gelu(x)); }) < 1e-5);
    // Complex tensors transform per real/imag part.
    Tensor xc = random_tensor({1, 4, 4}, rng, true);
    CHECK(check_gradients({&xc}, [&] { return sum_sq(ad::ifft2(ad::gelu(xc))); }) < 1e-5);
}

TEST_CASE("sigmoid: midpoint, open bounds, gradient") {
    Tensor zero = Tensor::zeros({1});
    CHECK(ad::sigmoid(zero).at(0) == doctest::Approx(0.5));
    Rng rng(6);
    Tensor x = random_tensor({4, 4}, rng);
    for (double& v : *x.data) v *= 50.0;
    Tensor y = ad::sigmoid(x);
    for (std::size_t i = 0; i < y.numel(); ++i) {
        CHECK(y.at(i) > 0.0);
        CHECK(y.at(i) < 1.0);
    }
    Tensor xs = random_tensor({3, 3}, rng);
    CHECK(check_gradients({&xs}, [&] { return sum_sq(ad::sigmoid(xs)); }) < 1e-5);
}

TEST_CASE("softmax: uniform input, normalization, gradient") {
    Tensor u = Tensor::full({2, 5}, 0.7);
    Tensor y = ad::softmax(u, 1);
    for (std::size_t i = 0; i < y.numel(); ++i) CHECK(y.at(i) == doctest::Approx(0.2));

    Rng rng(7);
    Tensor x = random_tensor({3, 6}, rng);
    Tensor s = ad::softmax(x, 1);
    for (int r = 0; r < 3; ++r) {
        double acc = 0.0;
        for (int c = 0; c < 6; ++c) acc += s.at(r * 6 + c);
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Per-axis checks, including the outer axis.
    CHECK(check_gradients({&x}, [&] { return sum_sq(ad::softmax(x, 1)); }) < 1e-5);
    CHECK(check_gradients({&x}, [&] { return sum_sq(ad::softmax(x, 0)); }) < 1e-5);
}

TEST_CASE("layernorm: fixed point, standardization, gradient") {
    // A row that is already zero-mean unit-variance stays put (unit scale).
    Tensor x = Tensor::from({1, 4}, {-1.0, 1.0, -1.0, 1.0});
    Tensor one = Tensor::full({4}, 1.0);
    Tensor zero = Tensor::zeros({4});
    Tensor y = ad::layernorm(x, one, zero);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::abs(y.at(i) - x.at(i)) < 1e-12);

    Rng rng(8);
    Tensor r = random_tensor({3, 8}, rng);
    CHECK_THROWS_AS(ad::layernorm(r, one, zero), ShapeError); // affine width mismatch

    Tensor scale8 = Tensor::full({8}, 1.0), shift8 = Tensor::zeros({8});
    Tensor n = ad::layernorm(r, scale8, shift8);
    for (int row = 0; row < 3; ++row) {
        double mu = 0.0, var = 0.0;
        for (int c = 0; c < 8; ++c) mu += n.at(row * 8 + c);
        mu /= 8;
        for (int c = 0; c < 8; ++c) var += (n.at(row * 8 + c) - mu) * (n.at(row * 8 + c) - mu);
        var /= 8;
        CHECK(std::abs(mu) < 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
    }
    Tensor sc = random_tensor({8}, rng), sh = random_tensor({8}, rng);
    CHECK(check_gradients({&r, &sc, &sh}, [&] { return sum_sq(ad::layernorm(r, sc, sh)); }) <
          1e-5);
}

TEST_CASE("fft2/ifft2: DC mode, round trip, Parseval, gradients") {
    Tensor c = Tensor::full({1, 4, 4}, 2.0);
    Tensor f = ad::fft2(c);
    CHECK(f.at(0) == doctest::Approx(8.0)); // DC = 2 * sqrt(16)
    double off = 0.0;
    for (std::size_t i = 1; i < f.numel(); ++i)
        off = std::max({off, std::abs(f.at(2 * i)), std::abs(f.at(2 * i + 1))});
    CHECK(off < 1e-12);

    Rng rng(9);
    Tensor x = random_tensor({2, 8, 8}, rng);
    Tensor round = ad::ifft2(ad::fft2(x));
    double worst = 0.0, norm_in = 0.0, norm_sp = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        worst = std::max(worst, std::abs(round.at(i) - x.at(i)));
        norm_in += x.at(i) * x.at(i);
    }
    Tensor spec = ad::fft2(x);
    for (std::size_t i = 0; i < spec.scalars(); ++i) norm_sp += spec.at(i) * spec.at(i);
    CHECK(worst < 1e-12);
    CHECK(norm_sp == doctest::Approx(norm_in).epsilon(1e-12)); // unitary

    CHECK_THROWS_AS(ad::fft2(Tensor::zeros({1, 6, 8})), ShapeError);

    // A smooth nonlinearity in spectral space makes the transform gradients
    // non-trivial on both sides.
    Tensor xg = random_tensor({1, 4, 4}, rng);
    CHECK(check_gradients({&xg}, [&] { return sum_sq(ad::ifft2(ad::gelu(ad::fft2(xg)))); }) <
          1e-5);
    Tensor xc = random_tensor({1, 4, 4}, rng, true);
    CHECK(check_gradients({&xc}, [&] { return sum_sq(ad::ifft2(xc)); }) < 1e-5);
}

TEST_CASE("block complex linear: identity, bias broadcast, gradient") {
    const int heads = 2, dh = 2, h = 2, w = 2;
    Rng rng(10);
    Tensor x = random_tensor({heads * dh, h, w}, rng, true);

    Tensor eye = Tensor::zeros({heads, dh, dh}, true);
    for (int g = 0; g < heads; ++g)
        for (int d = 0; d < dh; ++d) (*eye.data)[2 * ((g * dh + d) * dh + d)] = 1.0;
    Tensor y = ad::block_complex_linear(x, eye, {}, heads);
    for (std::size_t i = 0; i < x.scalars(); ++i)
        CHECK(y.at(i) == doctest::Approx(x.at(i)).epsilon(1e-14));

    Tensor zero_w = Tensor::zeros({heads, dh, dh}, true);
    Tensor b = random_tensor({h, w, heads, dh}, rng, true);
    Tensor yb = ad::block_complex_linear(x, zero_w, b, heads);
    for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix)
            for (int g = 0; g < heads; ++g)
                for (int d = 0; d < dh; ++d) {
                    const std::size_t mode = static_cast<std::size_t>(iy) * w + ix;
                    const std::size_t out_el =
                        (static_cast<std::size_t>(g * dh + d) * h + iy) * w + ix;
                    const std::size_t b_el = (mode * heads + g) * dh + d;
                    CHECK(yb.at(2 * out_el) == doctest::Approx(b.at(2 * b_el)));
                    CHECK(yb.at(2 * out_el + 1) == doctest::Approx(b.at(2 * b_el + 1)));
                }

    Tensor wt = random_tensor({heads, dh, dh}, rng, true);
    Tensor bias = random_tensor({h, w, heads, dh}, rng, true);
    CHECK(check_gradients({&x, &wt, &bias}, [&] {
              return sum_sq(ad::ifft2(ad::block_complex_linear(x, wt, bias, heads)));
          }) < 1e-5);

    CHECK_THROWS_AS(ad::block_complex_linear(x, wt, bias, 3), ShapeError);
}

TEST_CASE("softshrink: identity at zero, dead zone, gradient away from kinks") {
    Rng rng(11);
    Tensor x = random_tensor({3, 3}, rng);
    Tensor y0 = ad::softshrink(x, 0.0);
    CHECK(*y0.data == *x.data);

    Tensor small = Tensor::from({3}, {0.2, -0.3, 0.05});
    Tensor dead = ad::softshrink(small, 0.4);
    for (std::size_t i = 0; i < 3; ++i) CHECK(dead.at(i) == 0.0);

    // Entries well away from +-lambda so finite differences are clean.
    Tensor far = Tensor::from({4}, {0.9, -1.2, 0.6, -0.8});
    CHECK(check_gradients({&far}, [&] { return sum_sq(ad::softshrink(far, 0.3)); }) < 1e-5);
    CHECK_THROWS_AS(ad::softshrink(x, -0.1), ConfigError);
}

TEST_CASE("mse loss: identities and closed-form gradient") {
    Rng rng(12);
    Tensor u = random_tensor({3, 5}, rng);
    CHECK(ad::mse_loss(u, u).at(0) == 0.0);

    Tensor shifted = u;
    shifted.data = std::make_shared<std::vector<double>>(*u.data);
    for (double& v : *shifted.data) v += 0.25;
    CHECK(ad::mse_loss(shifted, u).at(0) == doctest::Approx(0.0625).epsilon(1e-12));

    Tensor pred = random_tensor({3, 5}, rng);
    Tensor target = random_tensor({3, 5}, rng);
    ad::Tape tape;
    tape.watch(pred);
    Tensor loss = ad::mse_loss(pred, target);
    ad::backward(loss);
    for (std::size_t i = 0; i < pred.numel(); ++i)
        CHECK((*pred.grad)[i] ==
              doctest::Approx(2.0 * (pred.at(i) - target.at(i)) / 15.0).epsilon(1e-12));
}

TEST_CASE("backward: composite chain, constants get no grad, single use") {
    Rng rng(13);
    Tensor x = random_tensor({2, 3}, rng);
    Tensor w = random_tensor({3, 2}, rng);
    Tensor constant = random_tensor({2, 2}, rng); // never watched
    const double err = check_gradients({&x, &w}, [&] {
        return ad::mse_loss(ad::sigmoid(ad::linear(x, w, {})), constant);
    });
    CHECK(err < 1e-5);
    CHECK(!constant.grad); // constants stay gradient-free

    ad::Tape tape;
    tape.watch(x);
    Tensor loss = ad::mse_loss(ad::sigmoid(ad::linear(x, w, {})), constant);
    ad::backward(loss);
    CHECK_THROWS_AS(ad::backward(loss), std::logic_error);
}

TEST_CASE("adam: zero gradient, first-step magnitude, determinism") {
    Rng rng(14);
    Tensor p1 = random_tensor({4}, rng);
    const std::vector<double> before = *p1.data;
    p1.grad = std::make_shared<std::vector<double>>(4, 0.0);
    std::vector<Tensor*> params{&p1};
    ad::AdamState state;
    ad::adam_step(params, state);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(p1.at(i) == doctest::Approx(before[i]).epsilon(1e-12));

    Tensor p2 = Tensor::from({3}, {1.0, 2.0, -1.0});
    p2.grad = std::make_shared<std::vector<double>>(std::vector<double>{0.5, -0.25, 2.0});
    std::vector<Tensor*> params2{&p2};
    ad::AdamState s2;
    s2.lr = 1e-3;
    ad::adam_step(params2, s2);
    // First bias-corrected step moves by lr * sign(g) up to epsilon effects.
    CHECK(p2.at(0) == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
    CHECK(p2.at(1) == doctest::Approx(2.0 + 1e-3).epsilon(1e-6));
    CHECK(p2.at(2) == doctest::Approx(-1.0 - 1e-3).epsilon(1e-6));

    // Deterministic: same inputs, same result.
    Tensor q = Tensor::from({3}, {1.0, 2.0, -1.0});
    q.grad = std::make_shared<std::vector<double>>(std::vector<double>{0.5, -0.25, 2.0});
    std::vector<Tensor*> params3{&q};
    ad::AdamState s3;
    s3.lr = 1e-3;
    ad::adam_step(params3, s3);
    CHECK(*q.data == *p2.data);
}
