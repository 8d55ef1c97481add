#include "bgcount/losses.hpp"

#include <algorithm>
#include <cmath>

namespace bgcount {

void LossConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be >= 0");
    if (!(probability_clamp > 0.0 && probability_clamp < 0.5)) {
        throw ParameterError("probability_clamp must lie in (0, 0.5)");
    }
}

ValueAndGradient bce_loss(const SoftMask& probs, const BinaryMask& gt, double clamp) {
    require_same_shape(probs, gt, "bce_loss");
    if (!(clamp > 0.0 && clamp < 0.5)) throw ParameterError("bce_loss: clamp must lie in (0, 0.5)");

    ValueAndGradient out{0.0, RealGrid(probs.height(), probs.width())};
    if (probs.empty()) return out;
    const double inv_n = 1.0 / static_cast<double>(probs.size());
    const auto pv = probs.values();
    const auto gv = gt.values();
    auto grad = out.gradient.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double p = pv[i];
        const double pc = std::min(std::max(p, clamp), 1.0 - clamp);
        const bool positive = gv[i] != 0;
        sum += positive ? -std::log(pc) : -std::log(1.0 - pc);
        if (p >= clamp && p <= 1.0 - clamp) {
            grad[i] = (positive ? -1.0 / pc : 1.0 / (1.0 - pc)) * inv_n;
        }
    }
    out.value = sum * inv_n;
    return out;
}

ValueAndGradient density_loss(const DensityMap& pred, const DensityMap& gt, DensityLossKind kind) {
    require_same_shape(pred, gt, "density_loss");
    ValueAndGradient out{0.0, RealGrid(pred.height(), pred.width())};
    const auto pv = pred.values();
    const auto gv = gt.values();
    auto grad = out.gradient.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double diff = pv[i] - gv[i];
        if (kind == DensityLossKind::LiteralEq4) {
            sum += std::abs(diff);
            grad[i] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        } else {
            sum += diff * diff;
            grad[i] = 2.0 * diff;
        }
    }
    out.value = sum;
    return out;
}

double stable_sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

SoftMask sigmoid(const RealGrid& logits) {
    SoftMask out(logits.height(), logits.width());
    const auto lv = logits.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < lv.size(); ++i) ov[i] = stable_sigmoid(lv[i]);
    return out;
}

LossOutput combined_loss(const DensityMap& d_int, const RealGrid& mask_logits, const DensityMap& d_gt,
                         const BinaryMask& m_gt, const LossConfig& cfg) {
    cfg.validate();
    require_same_shape(d_int, mask_logits, "combined_loss logits");
    require_same_shape(d_int, d_gt, "combined_loss density");
    require_same_shape(d_int, m_gt, "combined_loss mask");

    const SoftMask probs = sigmoid(mask_logits);
    const DensityMap d_pred = hadamard(d_int, probs);
    const auto dens = density_loss(d_pred, d_gt, cfg.density_loss_kind);
    const auto bce = bce_loss(probs, m_gt, cfg.probability_clamp);

    LossOutput out;
    out.density_term = dens.value;
    out.bce_term = bce.value;
    out.total = dens.value + cfg.lambda * bce.value;
    out.grad_wrt_density_int = RealGrid(d_int.height(), d_int.width());
    out.grad_wrt_mask_logits = RealGrid(d_int.height(), d_int.width());

    const auto dv = d_int.values();
    const auto pv = probs.values();
    const auto g_dens = dens.gradient.values();
    const auto g_bce = bce.gradient.values();
    auto g_int = out.grad_wrt_density_int.values();
    auto g_logit = out.grad_wrt_mask_logits.values();
    for (std::size_t i = 0; i < dv.size(); ++i) {
        const double p = pv[i];
        g_int[i] = g_dens[i] * p;
        const double g_prob = g_dens[i] * dv[i] + cfg.lambda * g_bce[i];
        g_logit[i] = g_prob * p * (1.0 - p);
    }
    return out;
}

}  // namespace bgcount
