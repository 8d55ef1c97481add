#include "bgcount/toymodel.hpp"

#include <cmath>
#include <random>
#include <string>

namespace bgcount {

ConvLayer::ConvLayer(std::size_t out, std::size_t in)
    : out_channels(out), in_channels(in), weights(out * in * kKernelSize * kKernelSize, 0.0),
      bias(out, 0.0) {}

namespace {

struct LayerShape {
    std::size_t out, in;
};

constexpr LayerShape kArchitecture[kToyLayerCount] = {
    {kToyChannels, 1},            {kToyChannels, kToyChannels}, {kToyChannels, kToyChannels},
    {1, kToyChannels},            {kToyChannels, kToyChannels}, {kToyChannels, kToyChannels},
    {1, kToyChannels},
};

}  // namespace

ToyModelParams ToyModelParams::zeros() {
    ToyModelParams p;
    for (const auto& s : kArchitecture) p.layers.emplace_back(s.out, s.in);
    return p;
}

ToyModelParams ToyModelParams::initialize(std::uint64_t seed) {
    ToyModelParams p = zeros();
    std::mt19937_64 rng(seed);
    for (auto& layer : p.layers) {
        const double fan_in = static_cast<double>(layer.in_channels * layer.kernel_h * layer.kernel_w);
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
        for (auto& w : layer.weights) w = normal(rng);
    }
    return p;
}

void ToyModelParams::validate() const {
    if (layers.size() != kToyLayerCount) {
        throw ShapeError("toy model expects " + std::to_string(kToyLayerCount) + " layers, got " +
                         std::to_string(layers.size()));
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.out_channels != kArchitecture[l].out || layer.in_channels != kArchitecture[l].in ||
            layer.kernel_h != kKernelSize || layer.kernel_w != kKernelSize ||
            layer.weights.size() != layer.out_channels * layer.in_channels * kKernelSize * kKernelSize ||
            layer.bias.size() != layer.out_channels) {
            throw ShapeError("toy model layer " + std::to_string(l) + " has the wrong shape");
        }
        if (!all_finite(layer.weights) || !all_finite(layer.bias)) {
            throw NumericError("toy model layer " + std::to_string(l) + " has non-finite parameters");
        }
    }
}

std::size_t ToyModelParams::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.parameter_count();
    return n;
}

double& ToyModelParams::at(std::size_t flat) {
    for (auto& layer : layers) {
        if (flat < layer.weights.size()) return layer.weights[flat];
        flat -= layer.weights.size();
        if (flat < layer.bias.size()) return layer.bias[flat];
        flat -= layer.bias.size();
    }
    throw ParameterError("parameter index out of range");
}

double ToyModelParams::at(std::size_t flat) const { return const_cast<ToyModelParams&>(*this).at(flat); }

void ToyModelParams::add_scaled(const ToyModelParams& other, double scale) {
    if (other.layers.size() != layers.size()) throw ShapeError("add_scaled: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& a = layers[l];
        const auto& b = other.layers[l];
        if (a.weights.size() != b.weights.size() || a.bias.size() != b.bias.size()) {
            throw ShapeError("add_scaled: layer shape mismatch");
        }
        for (std::size_t i = 0; i < a.weights.size(); ++i) a.weights[i] += scale * b.weights[i];
        for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += scale * b.bias[i];
    }
}

namespace {

// Channel-major stack of H x W planes.
struct Tensor {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), data(c * h * w, 0.0) {}

    double* plane(std::size_t c) { return data.data() + c * height * width; }
    const double* plane(std::size_t c) const { return data.data() + c * height * width; }
};

// Row/column range of output pixels whose tap (r, c) lands inside the input.
struct TapRange {
    std::size_t y0, y1, x0, x1;  // half-open
};

TapRange tap_range(std::size_t r, std::size_t c, std::size_t h, std::size_t w) {
    return {r == 0 ? 1u : 0u, r == 2 ? h - 1 : h, c == 0 ? 1u : 0u, c == 2 ? w - 1 : w};
}

Tensor conv_forward(const ConvLayer& layer, const Tensor& in) {
    const std::size_t h = in.height;
    const std::size_t w = in.width;
    Tensor out(layer.out_channels, h, w);
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
        double* dst = out.plane(o);
        for (std::size_t p = 0; p < h * w; ++p) dst[p] = layer.bias[o];
        for (std::size_t i = 0; i < layer.in_channels; ++i) {
            const double* src = in.plane(i);
            for (std::size_t r = 0; r < kKernelSize; ++r) {
                for (std::size_t c = 0; c < kKernelSize; ++c) {
                    const double wv = layer.weight(o, i, r, c);
                    const TapRange t = tap_range(r, c, h, w);
                    for (std::size_t y = t.y0; y < t.y1; ++y) {
                        double* drow = dst + y * w;
                        const double* srow = src + (y + r - 1) * w + c;  // srow[x - 1] is tap (r, c) of x
                        for (std::size_t x = t.x0; x < t.x1; ++x) drow[x] += wv * srow[x - 1];
                    }
                }
            }
        }
    }
    return out;
}

// Accumulates weight/bias gradients into `grad` and returns the input gradient
// (skipped when `need_input_grad` is false).
Tensor conv_backward(const ConvLayer& layer, const Tensor& in, const Tensor& grad_out, ConvLayer& grad,
                     bool need_input_grad) {
    const std::size_t h = in.height;
    const std::size_t w = in.width;
    Tensor grad_in;
    if (need_input_grad) grad_in = Tensor(layer.in_channels, h, w);
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
        const double* go = grad_out.plane(o);
        double bsum = 0.0;
        for (std::size_t p = 0; p < h * w; ++p) bsum += go[p];
        grad.bias[o] += bsum;
        for (std::size_t i = 0; i < layer.in_channels; ++i) {
            const double* src = in.plane(i);
            double* gi = need_input_grad ? grad_in.plane(i) : nullptr;
            for (std::size_t r = 0; r < kKernelSize; ++r) {
                for (std::size_t c = 0; c < kKernelSize; ++c) {
                    const double wv = layer.weight(o, i, r, c);
                    const TapRange t = tap_range(r, c, h, w);
                    double wsum = 0.0;
                    for (std::size_t y = t.y0; y < t.y1; ++y) {
                        const double* grow = go + y * w;
                        const std::size_t shift = (y + r - 1) * w + c;
                        const double* srow = src + shift;
                        for (std::size_t x = t.x0; x < t.x1; ++x) wsum += grow[x] * srow[x - 1];
                        if (gi != nullptr) {
                            double* girow = gi + shift;
                            for (std::size_t x = t.x0; x < t.x1; ++x) girow[x - 1] += wv * grow[x];
                        }
                    }
                    grad.weights[((o * layer.in_channels + i) * kKernelSize + r) * kKernelSize + c] += wsum;
                }
            }
        }
    }
    return grad_in;
}

Tensor relu(const Tensor& z) {
    Tensor a = z;
    for (auto& v : a.data) v = v > 0.0 ? v : 0.0;
    return a;
}

// Zeroes gradient entries where the pre-activation was not positive.
void relu_backward(Tensor& grad, const Tensor& z) {
    for (std::size_t i = 0; i < grad.data.size(); ++i) {
        if (!(z.data[i] > 0.0)) grad.data[i] = 0.0;
    }
}

struct HeadTrace {
    Tensor z1, a1, z2, a2, out;
};

struct Trace {
    Tensor input;
    Tensor z0, a0;
    HeadTrace regression;
    HeadTrace segmentation;
};

HeadTrace head_forward(const ToyModelParams& p, std::size_t first, const Tensor& features) {
    HeadTrace t;
    t.z1 = conv_forward(p.layers[first], features);
    t.a1 = relu(t.z1);
    t.z2 = conv_forward(p.layers[first + 1], t.a1);
    t.a2 = relu(t.z2);
    t.out = conv_forward(p.layers[first + 2], t.a2);
    return t;
}

// Backpropagates `grad_out` (1 x H x W) through one head, adding the head's
// parameter gradients to `grads` and the feature gradient to `grad_features`.
void head_backward(const ToyModelParams& p, std::size_t first, const Tensor& features, const HeadTrace& t,
                   Tensor grad_out, ToyModelParams& grads, Tensor& grad_features) {
    Tensor g2 = conv_backward(p.layers[first + 2], t.a2, grad_out, grads.layers[first + 2], true);
    relu_backward(g2, t.z2);
    Tensor g1 = conv_backward(p.layers[first + 1], t.a1, g2, grads.layers[first + 1], true);
    relu_backward(g1, t.z1);
    Tensor gf = conv_backward(p.layers[first], features, g1, grads.layers[first], true);
    for (std::size_t i = 0; i < gf.data.size(); ++i) grad_features.data[i] += gf.data[i];
}

Trace run_forward(const ToyModelParams& params, const RealGrid& input, bool with_bs) {
    params.validate();
    if (input.height() < kMinToyInputSide || input.width() < kMinToyInputSide) {
        throw ParameterError("toy model input must be at least " + std::to_string(kMinToyInputSide) +
                             "x" + std::to_string(kMinToyInputSide));
    }
    if (!all_finite(input.values())) throw NumericError("toy model input has non-finite values");

    Trace t;
    t.input = Tensor(1, input.height(), input.width());
    std::copy(input.values().begin(), input.values().end(), t.input.data.begin());
    t.z0 = conv_forward(params.layers[kTrunk], t.input);
    t.a0 = relu(t.z0);
    t.regression = head_forward(params, kRegression1, t.a0);
    if (with_bs) t.segmentation = head_forward(params, kSegmentation1, t.a0);
    return t;
}

}  // namespace

ForwardResult forward(const ToyModelParams& params, const RealGrid& input, bool with_bs) {
    const Trace t = run_forward(params, input, with_bs);
    const std::size_t h = input.height();
    const std::size_t w = input.width();
    ForwardResult r;
    r.d_int = DensityMap(h, w, t.regression.out.data);
    if (with_bs) {
        r.mask_logits = RealGrid(h, w, t.segmentation.out.data);
        r.d_p = hadamard(r.d_int, sigmoid(r.mask_logits));
    } else {
        r.d_p = r.d_int;
    }
    if (!all_finite(r.d_p.values())) throw NumericError("toy model produced non-finite output");
    return r;
}

std::vector<double> preactivations(const ToyModelParams& params, const RealGrid& input, bool with_bs) {
    const Trace t = run_forward(params, input, with_bs);
    std::vector<double> out(t.z0.data);
    auto append = [&out](const Tensor& z) { out.insert(out.end(), z.data.begin(), z.data.end()); };
    append(t.regression.z1);
    append(t.regression.z2);
    if (with_bs) {
        append(t.segmentation.z1);
        append(t.segmentation.z2);
    }
    return out;
}

ModelGradients loss_and_gradients(const ToyModelParams& params, const RealGrid& input,
                                  const DensityMap& gt_density, const BinaryMask& gt_mask, bool with_bs,
                                  const LossConfig& cfg) {
    cfg.validate();
    require_same_shape(input, gt_density, "loss_and_gradients density");
    require_same_shape(input, gt_mask, "loss_and_gradients mask");
    const Trace t = run_forward(params, input, with_bs);
    const std::size_t h = input.height();
    const std::size_t w = input.width();
    const DensityMap d_int(h, w, t.regression.out.data);

    ModelGradients result{LossOutput{}, ToyModelParams::zeros()};
    Tensor grad_d_int(1, h, w);
    Tensor grad_logits(1, h, w);
    if (with_bs) {
        const RealGrid logits(h, w, t.segmentation.out.data);
        result.loss = combined_loss(d_int, logits, gt_density, gt_mask, cfg);
        const auto gi = result.loss.grad_wrt_density_int.values();
        const auto gl = result.loss.grad_wrt_mask_logits.values();
        std::copy(gi.begin(), gi.end(), grad_d_int.data.begin());
        std::copy(gl.begin(), gl.end(), grad_logits.data.begin());
    } else {
        auto dens = density_loss(d_int, gt_density, cfg.density_loss_kind);
        result.loss.density_term = dens.value;
        result.loss.total = dens.value;
        const auto g = dens.gradient.values();
        std::copy(g.begin(), g.end(), grad_d_int.data.begin());
        result.loss.grad_wrt_density_int = std::move(dens.gradient);
    }
    if (!std::isfinite(result.loss.total)) throw NumericError("non-finite loss");

    Tensor grad_features(kToyChannels, h, w);
    head_backward(params, kRegression1, t.a0, t.regression, std::move(grad_d_int), result.grads, grad_features);
    if (with_bs) {
        head_backward(params, kSegmentation1, t.a0, t.segmentation, std::move(grad_logits), result.grads,
                      grad_features);
    }
    relu_backward(grad_features, t.z0);
    conv_backward(params.layers[kTrunk], t.input, grad_features, result.grads.layers[kTrunk], false);
    return result;
}

Bytes encode_params(const ToyModelParams& params) {
    ByteWriter w;
    w.magic("TFCN");
    w.u16(kModelFormatVersion);
    w.u32(static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& layer : params.layers) {
        if (layer.weights.size() != layer.out_channels * layer.in_channels * layer.kernel_h * layer.kernel_w ||
            layer.bias.size() != layer.out_channels) {
            throw ShapeError("encode_params: inconsistent layer shape");
        }
        w.u32(static_cast<std::uint32_t>(layer.out_channels));
        w.u32(static_cast<std::uint32_t>(layer.in_channels));
        w.u32(static_cast<std::uint32_t>(layer.kernel_h));
        w.u32(static_cast<std::uint32_t>(layer.kernel_w));
        for (const double v : layer.weights) w.f64(v);
        for (const double v : layer.bias) w.f64(v);
    }
    return w.take();
}

ToyModelParams decode_params(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("TFCN");
    const std::size_t version_at = r.offset();
    const auto version = r.u16("version");
    if (version != kModelFormatVersion) {
        throw FormatError("unsupported model version " + std::to_string(version), version_at);
    }
    const std::size_t count = r.u32("layer count");
    ToyModelParams params;
    for (std::size_t l = 0; l < count; ++l) {
        ConvLayer layer;
        layer.out_channels = r.u32("out channels");
        layer.in_channels = r.u32("in channels");
        layer.kernel_h = r.u32("kernel height");
        layer.kernel_w = r.u32("kernel width");
        const std::size_t budget = r.remaining() / 8;
        std::size_t n = 1;
        bool fits = true;
        for (const std::size_t dim : {layer.out_channels, layer.in_channels, layer.kernel_h, layer.kernel_w}) {
            if (dim != 0 && n > budget / dim) fits = false;
            n *= fits ? dim : 1;
        }
        if (!fits || n + layer.out_channels > budget) {
            throw FormatError("truncated payload in layer " + std::to_string(l), r.offset() + r.remaining());
        }
        layer.weights.resize(n);
        for (auto& v : layer.weights) v = r.f64("weight");
        layer.bias.resize(layer.out_channels);
        for (auto& v : layer.bias) v = r.f64("bias");
        params.layers.push_back(std::move(layer));
    }
    r.expect_end();
    return params;
}

void write_params(const std::filesystem::path& path, const ToyModelParams& params) {
    write_file_bytes(path, encode_params(params));
}

ToyModelParams read_params(const std::filesystem::path& path) {
    const Bytes bytes = read_file_bytes(path);
    return decode_params(bytes);
}

}  // namespace bgcount
