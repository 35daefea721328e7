#include "lmd/uafno.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace lmd {

using ad::Tensor;

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::string lvl(const char* base, int i, const char* leaf) {
    return std::string(base) + std::to_string(i) + "." + leaf;
}

} // namespace

void UAFNOConfig::validate() const {
    if (in_channels < 1) throw ConfigError("model: in_channels must be >= 1");
    if (enc_levels < 1) throw ConfigError("model: enc_levels must be >= 1");
    if (base_channels < 1) throw ConfigError("model: base_channels must be >= 1");
    if (n_blocks < 0) throw ConfigError("model: n_blocks must be >= 0");
    if (mlp_hidden < 1) throw ConfigError("model: mlp_hidden must be >= 1");
    if (patch != 1) throw ConfigError("model: only patch size 1 is supported");
    if (!power_of_two(input_h) || !power_of_two(input_w))
        throw ConfigError("model: input dims must be powers of two");
    if (input_h % (1 << enc_levels) != 0 || input_w % (1 << enc_levels) != 0 || latent_h() < 1 ||
        latent_w() < 1)
        throw ConfigError("model: input dims not divisible by 2^enc_levels");
    if (heads < 1 || latent_channels() % heads != 0)
        throw ConfigError("model: latent channels (" + std::to_string(latent_channels()) +
                          ") not divisible by heads (" + std::to_string(heads) + ")");
    if (shrink_lambda < 0.0) throw ConfigError("model: shrink lambda must be >= 0");
}

UAFNOConfig UAFNOConfig::production() {
    UAFNOConfig cfg;
    cfg.in_channels = 3;
    cfg.input_h = cfg.input_w = 512;
    cfg.enc_levels = 3;
    cfg.base_channels = 64; // latent = 64 * 2^2 = 256 channels at 64x64
    cfg.n_blocks = 12;
    cfg.heads = 16;
    cfg.mlp_hidden = 3072;
    return cfg;
}

std::vector<ParamSpec> parameter_manifest(const UAFNOConfig& cfg) {
    cfg.validate();
    std::vector<ParamSpec> specs;
    const int L = cfg.enc_levels;
    for (int l = 0; l < L; ++l) {
        const int cin = l == 0 ? cfg.in_channels : cfg.level_channels(l - 1);
        const int ch = cfg.level_channels(l);
        specs.push_back({lvl("enc", l, "conv1.weight"), {ch, cin, 3, 3}, false, InitKind::conv_weight});
        specs.push_back({lvl("enc", l, "conv1.bias"), {ch}, false, InitKind::zero});
        specs.push_back({lvl("enc", l, "conv2.weight"), {ch, ch, 3, 3}, false, InitKind::conv_weight});
        specs.push_back({lvl("enc", l, "conv2.bias"), {ch}, false, InitKind::zero});
    }
    const int C = cfg.latent_channels();
    const int dh = C / cfg.heads;
    const int lh = cfg.latent_h(), lw = cfg.latent_w();
    for (int b = 0; b < cfg.n_blocks; ++b) {
        specs.push_back({lvl("block", b, "ln1.scale"), {C}, false, InitKind::one});
        specs.push_back({lvl("block", b, "ln1.shift"), {C}, false, InitKind::zero});
        specs.push_back({lvl("block", b, "mix.weight"), {cfg.heads, dh, dh}, true, InitKind::mix_weight});
        specs.push_back({lvl("block", b, "mix.bias"), {lh, lw, cfg.heads, dh}, true, InitKind::zero});
        specs.push_back({lvl("block", b, "ln2.scale"), {C}, false, InitKind::one});
        specs.push_back({lvl("block", b, "ln2.shift"), {C}, false, InitKind::zero});
        specs.push_back({lvl("block", b, "mlp1.weight"), {C, cfg.mlp_hidden}, false, InitKind::linear_weight});
        specs.push_back({lvl("block", b, "mlp1.bias"), {cfg.mlp_hidden}, false, InitKind::zero});
        specs.push_back({lvl("block", b, "mlp2.weight"), {cfg.mlp_hidden, C}, false, InitKind::linear_weight});
        specs.push_back({lvl("block", b, "mlp2.bias"), {C}, false, InitKind::zero});
    }
    for (int l = L - 1; l >= 0; --l) {
        const int cprev = l == L - 1 ? cfg.latent_channels() : cfg.level_channels(l + 1);
        const int ch = cfg.level_channels(l);
        specs.push_back({lvl("dec", l, "conv1.weight"), {ch, cprev + ch, 3, 3}, false, InitKind::conv_weight});
        specs.push_back({lvl("dec", l, "conv1.bias"), {ch}, false, InitKind::zero});
        specs.push_back({lvl("dec", l, "conv2.weight"), {ch, ch, 3, 3}, false, InitKind::conv_weight});
        specs.push_back({lvl("dec", l, "conv2.bias"), {ch}, false, InitKind::zero});
    }
    specs.push_back({"head.weight", {cfg.in_channels, cfg.level_channels(0), 1, 1}, false,
                     InitKind::conv_weight});
    specs.push_back({"head.bias", {cfg.in_channels}, false, InitKind::zero});
    return specs;
}

ad::Tensor& Model::param(const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params[i];
    throw ConfigError("model: unknown parameter " + name);
}

const ad::Tensor& Model::param(const std::string& name) const {
    return const_cast<Model*>(this)->param(name);
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.scalars();
    return n;
}

Model build(const UAFNOConfig& cfg, std::uint64_t seed) {
    Model m;
    m.config = cfg;
    Rng rng(seed);
    for (const ParamSpec& spec : parameter_manifest(cfg)) {
        Tensor t = Tensor::zeros(spec.shape, spec.complex_vals);
        switch (spec.init) {
            case InitKind::conv_weight: {
                const double fan_in =
                    static_cast<double>(spec.shape[1]) * spec.shape[2] * spec.shape[3];
                const double b = std::sqrt(1.0 / fan_in);
                ad::fill_uniform(t, rng, -b, b);
                break;
            }
            case InitKind::linear_weight: {
                const double b = std::sqrt(1.0 / spec.shape[0]);
                ad::fill_uniform(t, rng, -b, b);
                break;
            }
            case InitKind::mix_weight: {
                const double b = std::sqrt(1.0 / spec.shape[2]);
                ad::fill_uniform(t, rng, -b, b);
                break;
            }
            case InitKind::one:
                std::fill(t.data->begin(), t.data->end(), 1.0);
                break;
            case InitKind::zero:
                break;
        }
        m.params.push_back(std::move(t));
        m.names.push_back(spec.name);
    }
    return m;
}

void attach(Model& model, ad::Tape& tape) {
    for (auto& p : model.params) tape.watch(p);
}

void detach(Model& model) {
    for (auto& p : model.params) {
        p.tape = nullptr;
        p.requires_grad = false;
        p.grad.reset();
    }
}

EncodeResult encode(const Model& model, const Tensor& x) {
    const UAFNOConfig& cfg = model.config;
    if (x.shape != std::vector<int>{cfg.in_channels, cfg.input_h, cfg.input_w} || x.complex_vals)
        throw ShapeError("encode: expected (" + std::to_string(cfg.in_channels) + "," +
                         std::to_string(cfg.input_h) + "," + std::to_string(cfg.input_w) +
                         "), got " + x.shape_str());
    EncodeResult res;
    Tensor z = x;
    for (int l = 0; l < cfg.enc_levels; ++l) {
        z = ad::gelu(ad::conv2d(z, model.param(lvl("enc", l, "conv1.weight")),
                                model.param(lvl("enc", l, "conv1.bias")), 1, 1,
                                ad::PadMode::periodic_x_reflect_y));
        z = ad::gelu(ad::conv2d(z, model.param(lvl("enc", l, "conv2.weight")),
                                model.param(lvl("enc", l, "conv2.bias")), 1, 1,
                                ad::PadMode::periodic_x_reflect_y));
        res.skips.push_back(z);
        z = ad::down2(z);
    }
    res.latent = z;
    return res;
}

ad::Tensor afno_block(const Model& model, int index, const Tensor& tokens) {
    const UAFNOConfig& cfg = model.config;
    const int h = tokens.shape[1], w = tokens.shape[2];
    // Spatial mixing in Fourier space with a residual skip.
    Tensor t = ad::chw_to_nc(tokens);
    t = ad::layernorm(t, model.param(lvl("block", index, "ln1.scale")),
                      model.param(lvl("block", index, "ln1.shift")));
    Tensor spectrum = ad::fft2(ad::nc_to_chw(t, h, w));
    spectrum = ad::block_complex_linear(spectrum, model.param(lvl("block", index, "mix.weight")),
                                        model.param(lvl("block", index, "mix.bias")), cfg.heads);
    spectrum = ad::gelu(spectrum);
    spectrum = ad::softshrink(spectrum, cfg.shrink_lambda);
    Tensor mixed = ad::add(tokens, ad::ifft2(spectrum));
    // Token-wise MLP with the second residual skip.
    Tensor u = ad::chw_to_nc(mixed);
    u = ad::layernorm(u, model.param(lvl("block", index, "ln2.scale")),
                      model.param(lvl("block", index, "ln2.shift")));
    u = ad::linear(u, model.param(lvl("block", index, "mlp1.weight")),
                   model.param(lvl("block", index, "mlp1.bias")));
    u = ad::gelu(u);
    u = ad::linear(u, model.param(lvl("block", index, "mlp2.weight")),
                   model.param(lvl("block", index, "mlp2.bias")));
    return ad::add(mixed, ad::nc_to_chw(u, h, w));
}

ad::Tensor decode(const Model& model, const Tensor& latent, const std::vector<Tensor>& skips) {
    const UAFNOConfig& cfg = model.config;
    if (static_cast<int>(skips.size()) != cfg.enc_levels)
        throw ShapeError("decode: expected " + std::to_string(cfg.enc_levels) + " skips, got " +
                         std::to_string(skips.size()));
    Tensor z = latent;
    for (int l = cfg.enc_levels - 1; l >= 0; --l) {
        z = ad::up2(z);
        z = ad::concat_channels(z, skips[static_cast<std::size_t>(l)]);
        z = ad::gelu(ad::conv2d(z, model.param(lvl("dec", l, "conv1.weight")),
                                model.param(lvl("dec", l, "conv1.bias")), 1, 1,
                                ad::PadMode::periodic_x_reflect_y));
        z = ad::gelu(ad::conv2d(z, model.param(lvl("dec", l, "conv2.weight")),
                                model.param(lvl("dec", l, "conv2.bias")), 1, 1,
                                ad::PadMode::periodic_x_reflect_y));
    }
    return ad::conv2d(z, model.param("head.weight"), model.param("head.bias"), 1, 0);
}

ad::Tensor forward(const Model& model, const Tensor& x) {
    EncodeResult enc = encode(model, x);
    Tensor z = enc.latent;
    for (int b = 0; b < model.config.n_blocks; ++b) z = afno_block(model, b, z);
    return ad::sigmoid(decode(model, z, enc.skips));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'U', 'A', 'F', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError(std::string("weights: truncated at ") + what);
    return v;
}

} // namespace

void save_weights(const Model& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("weights: cannot open for writing: " + path);
    const UAFNOConfig& c = model.config;
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    for (int v : {c.in_channels, c.input_h, c.input_w, c.enc_levels, c.base_channels, c.n_blocks,
                  c.heads, c.mlp_hidden, c.patch})
        put<std::uint32_t>(os, static_cast<std::uint32_t>(v));
    put<double>(os, c.shrink_lambda);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(model.params.size()));
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        const Tensor& t = model.params[i];
        const std::string& name = model.names[i];
        put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint8_t>(os, t.complex_vals ? 1 : 0);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
        os.write(reinterpret_cast<const char*>(t.data->data()),
                 static_cast<std::streamsize>(t.data->size() * sizeof(double)));
    }
    if (!os) throw IoError("weights: write failed: " + path);
}

Model load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("weights: cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw IoError("weights: bad magic in " + path);
    if (get<std::uint32_t>(is, "version") != kVersion)
        throw IoError("weights: unsupported version in " + path);

    UAFNOConfig c;
    c.in_channels = static_cast<int>(get<std::uint32_t>(is, "in_channels"));
    c.input_h = static_cast<int>(get<std::uint32_t>(is, "input_h"));
    c.input_w = static_cast<int>(get<std::uint32_t>(is, "input_w"));
    c.enc_levels = static_cast<int>(get<std::uint32_t>(is, "enc_levels"));
    c.base_channels = static_cast<int>(get<std::uint32_t>(is, "base_channels"));
    c.n_blocks = static_cast<int>(get<std::uint32_t>(is, "n_blocks"));
    c.heads = static_cast<int>(get<std::uint32_t>(is, "heads"));
    c.mlp_hidden = static_cast<int>(get<std::uint32_t>(is, "mlp_hidden"));
    c.patch = static_cast<int>(get<std::uint32_t>(is, "patch"));
    c.shrink_lambda = get<double>(is, "shrink_lambda");

    const auto manifest = parameter_manifest(c); // validates the config
    const auto count = get<std::uint32_t>(is, "param count");
    if (count != manifest.size())
        throw ConfigError("weights: parameter count " + std::to_string(count) +
                          " incompatible with config (expected " +
                          std::to_string(manifest.size()) + ")");

    Model m;
    m.config = c;
    for (const ParamSpec& spec : manifest) {
        const auto name_len = get<std::uint32_t>(is, "name length");
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is || name != spec.name)
            throw ConfigError("weights: parameter '" + name + "' does not match manifest entry '" +
                              spec.name + "'");
        const bool complex_vals = get<std::uint8_t>(is, "complex flag") != 0;
        const auto ndim = get<std::uint32_t>(is, "rank");
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(get<std::uint32_t>(is, "dim"));
        if (complex_vals != spec.complex_vals || shape != spec.shape)
            throw ConfigError("weights: shape mismatch for " + name);
        Tensor t = Tensor::zeros(shape, complex_vals);
        is.read(reinterpret_cast<char*>(t.data->data()),
                static_cast<std::streamsize>(t.data->size() * sizeof(double)));
        if (!is) throw IoError("weights: truncated payload in " + name);
        m.params.push_back(std::move(t));
        m.names.push_back(spec.name);
    }
    return m;
}

} // namespace lmd
