#pragma once

#include <string>
#include <vector>

#include "lmd/tensor.hpp"

namespace lmd {

// Architecture description. The encoder halves the resolution enc_levels
// times while the channel count doubles per level from base_channels, the
// bottleneck runs n_blocks Fourier token-mixing blocks on the latent grid,
// and the decoder mirrors the encoder with skip concatenations. The
// mode-indexed mixing biases are sized by the latent grid, so a built model
// is fixed to its input resolution.
struct UAFNOConfig {
    int in_channels = 3;
    int input_h = 64;
    int input_w = 64;
    int enc_levels = 3;
    int base_channels = 16;
    int n_blocks = 2;
    int heads = 4;
    int mlp_hidden = 128;
    int patch = 1; // one token per latent cell; other granularities unsupported
    double shrink_lambda = 0.0;

    int latent_h() const { return input_h >> enc_levels; }
    int latent_w() const { return input_w >> enc_levels; }
    int level_channels(int level) const { return base_channels << level; }
    int latent_channels() const { return level_channels(enc_levels - 1); }
    void validate() const;

    // Production-scale configuration: 3x512x512 input, 256-channel 64x64
    // latent, 12 blocks of 16 heads with 3072-wide MLPs.
    static UAFNOConfig production();
    bool operator==(const UAFNOConfig&) const = default;
};

enum class InitKind { conv_weight, linear_weight, mix_weight, one, zero };

struct ParamSpec {
    std::string name;
    std::vector<int> shape;
    bool complex_vals = false;
    InitKind init = InitKind::zero;
};

// Full parameter inventory in traversal (= serialization = RNG) order,
// computable without allocating any tensor.
std::vector<ParamSpec> parameter_manifest(const UAFNOConfig& cfg);

struct Model {
    UAFNOConfig config;
    std::vector<ad::Tensor> params;
    std::vector<std::string> names;

    ad::Tensor& param(const std::string& name);
    const ad::Tensor& param(const std::string& name) const;
    std::size_t parameter_count() const; // total scalar count
};

// Allocates and initializes all parameters: conv/linear/mixing weights
// uniform in [-b, b] with b = sqrt(1/fan_in), biases zero, layernorm scale
// one and shift zero. Bit-deterministic per seed.
Model build(const UAFNOConfig& cfg, std::uint64_t seed);

// Registers every parameter as a leaf on the tape (training) / removes the
// association (inference).
void attach(Model& model, ad::Tape& tape);
void detach(Model& model);

struct EncodeResult {
    ad::Tensor latent;
    std::vector<ad::Tensor> skips; // pre-pool activations, one per level
};

EncodeResult encode(const Model& model, const ad::Tensor& x);
ad::Tensor afno_block(const Model& model, int index, const ad::Tensor& tokens);
ad::Tensor decode(const Model& model, const ad::Tensor& latent,
                  const std::vector<ad::Tensor>& skips);

// sigmoid(decode(blocks(encode(x)))); output strictly inside (0,1). Input
// must match the built resolution exactly.
ad::Tensor forward(const Model& model, const ad::Tensor& x);

// Binary weights container "UAFW": config header plus named parameter
// tensors in manifest order; round trips are bit-exact and loading validates
// the embedded config against the manifest.
void save_weights(const Model& model, const std::string& path);
Model load_weights(const std::string& path);

} // namespace lmd
