#pragma once

#include "bgcount/grid.hpp"

namespace bgcount {

enum class DensityLossKind {
    /// Sum over pixels of sqrt((p - g)^2), i.e. the per-pixel absolute difference.
    LiteralEq4,
    /// Sum over pixels of (p - g)^2.
    SquaredL2,
};

struct LossConfig {
    double lambda = 1e-4;  // weight of the segmentation term
    DensityLossKind density_loss_kind = DensityLossKind::LiteralEq4;
    double probability_clamp = 1e-7;

    /// Throws ParameterError unless lambda >= 0 and 0 < clamp < 0.5.
    void validate() const;
};

struct ValueAndGradient {
    double value = 0.0;
    RealGrid gradient;
};

/// Pixel-averaged binary cross entropy between predicted probabilities and a
/// binary target. Probabilities are clamped into [clamp, 1 - clamp] first;
/// the gradient is that of the clamped expression (zero where clamping bites).
ValueAndGradient bce_loss(const SoftMask& probs, const BinaryMask& gt, double clamp = 1e-7);

/// Summed per-pixel density loss and its gradient with respect to `pred`.
/// The absolute-value subgradient at an exact tie is 0.
ValueAndGradient density_loss(const DensityMap& pred, const DensityMap& gt, DensityLossKind kind);

double stable_sigmoid(double x) noexcept;
SoftMask sigmoid(const RealGrid& logits);

struct LossOutput {
    double total = 0.0;
    double density_term = 0.0;
    double bce_term = 0.0;
    RealGrid grad_wrt_density_int;
    RealGrid grad_wrt_mask_logits;
};

/// Dual-task loss with background suppression:
///   M = sigmoid(logits),  D = d_int (.) M,
///   total = density_loss(D, d_gt) + lambda * bce(M, m_gt).
/// Both gradients follow the chain rule through the product and the sigmoid.
LossOutput combined_loss(const DensityMap& d_int, const RealGrid& mask_logits,
                         const DensityMap& d_gt, const BinaryMask& m_gt, const LossConfig& cfg);

}  // namespace bgcount
