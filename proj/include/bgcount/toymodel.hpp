#pragma once

// A tiny two-headed fully convolutional counting model with hand-written
// reverse-mode gradients.
//
//   input (1ch) -> trunk conv 1->8, ReLU
//     -> regression head: conv 8->8, ReLU, conv 8->8, ReLU, conv 8->1  = d_int
//     -> segmentation head: same stack                                  = mask logits
//   with background suppression:  d_p = d_int (.) sigmoid(logits)
//   without:                      d_p = d_int
//
// All convolutions are 3x3, stride 1, zero padded to keep H x W.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bgcount/byte_io.hpp"
#include "bgcount/grid.hpp"
#include "bgcount/losses.hpp"

namespace bgcount {

inline constexpr std::size_t kToyChannels = 8;
inline constexpr std::size_t kKernelSize = 3;
/// Smallest input side accepted by the model (receptive-field floor).
inline constexpr std::size_t kMinToyInputSide = 7;

struct ConvLayer {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel_h = kKernelSize;
    std::size_t kernel_w = kKernelSize;
    std::vector<double> weights;  // [out][in][kh][kw]
    std::vector<double> bias;     // [out]

    ConvLayer() = default;
    ConvLayer(std::size_t out, std::size_t in);

    double weight(std::size_t o, std::size_t i, std::size_t r, std::size_t c) const {
        return weights[((o * in_channels + i) * kernel_h + r) * kernel_w + c];
    }
    std::size_t parameter_count() const noexcept { return weights.size() + bias.size(); }

    friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

enum ToyLayer : std::size_t {
    kTrunk = 0,
    kRegression1 = 1,
    kRegression2 = 2,
    kRegressionOut = 3,
    kSegmentation1 = 4,
    kSegmentation2 = 5,
    kSegmentationOut = 6,
    kToyLayerCount = 7,
};

struct ToyModelParams {
    std::vector<ConvLayer> layers;

    /// Correctly shaped model with every parameter zero.
    static ToyModelParams zeros();
    /// He-normal weights, zero biases, deterministic in `seed`.
    static ToyModelParams initialize(std::uint64_t seed);

    /// Throws ShapeError on a wrong architecture, NumericError on non-finite values.
    void validate() const;

    std::size_t parameter_count() const noexcept;
    /// Flat view: layers in order, each layer's weights then biases.
    double& at(std::size_t flat);
    double at(std::size_t flat) const;

    /// this += scale * other, parameter by parameter.
    void add_scaled(const ToyModelParams& other, double scale);

    friend bool operator==(const ToyModelParams&, const ToyModelParams&) = default;
};

struct ForwardResult {
    DensityMap d_int;
    RealGrid mask_logits;  // 0x0 when background suppression is off
    DensityMap d_p;
};

ForwardResult forward(const ToyModelParams& params, const RealGrid& input, bool with_bs);

/// Every rectifier pre-activation of a forward pass, concatenated. Used to
/// keep finite-difference checks away from kinks.
std::vector<double> preactivations(const ToyModelParams& params, const RealGrid& input,
                                   bool with_bs);

struct ModelGradients {
    LossOutput loss;
    ToyModelParams grads;
};

/// Dual-task loss of one scene and its gradient with respect to every model
/// parameter. Without suppression the loss is density_loss(d_int, d_gt) and
/// the segmentation head receives exactly zero gradient.
ModelGradients loss_and_gradients(const ToyModelParams& params, const RealGrid& input,
                                  const DensityMap& gt_density, const BinaryMask& gt_mask,
                                  bool with_bs, const LossConfig& cfg);

// Model parameter file ("TFCN"), little-endian:
//   magic "TFCN", u16 version = 1, u32 layer count,
//   per layer: u32 out, u32 in, u32 kh, u32 kw, out*in*kh*kw f64 weights, out f64 biases.
inline constexpr std::uint16_t kModelFormatVersion = 1;

Bytes encode_params(const ToyModelParams& params);
ToyModelParams decode_params(std::span<const std::uint8_t> bytes);
void write_params(const std::filesystem::path& path, const ToyModelParams& params);
ToyModelParams read_params(const std::filesystem::path& path);

}  // namespace bgcount
