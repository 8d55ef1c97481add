#include "bgcount/grid.hpp"

#include <cmath>

namespace bgcount {

double masked_count(const DensityMap& d, const BinaryMask& m) {
    require_same_shape(d, m, "masked_count");
    const auto dv = d.values();
    const auto mv = m.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < dv.size(); ++i) {
        sum += dv[i] * static_cast<double>(mv[i]);
    }
    return sum;
}

double total(const DensityMap& d) {
    double sum = 0.0;
    for (const double v : d.values()) sum += v;
    return sum;
}

DensityMap hadamard(const DensityMap& d, const SoftMask& m) {
    require_same_shape(d, m, "hadamard");
    DensityMap out(d.height(), d.width());
    const auto dv = d.values();
    const auto mv = m.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < dv.size(); ++i) ov[i] = dv[i] * mv[i];
    return out;
}

BinaryMask all_ones(std::size_t height, std::size_t width) { return BinaryMask(height, width, 1); }

BinaryMask complement(const BinaryMask& m) {
    BinaryMask out(m.height(), m.width());
    const auto mv = m.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < mv.size(); ++i) ov[i] = static_cast<std::uint8_t>(1 - mv[i]);
    return out;
}

BinaryMask intersect(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b, "intersect");
    BinaryMask out(a.height(), a.width());
    const auto av = a.values();
    const auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < av.size(); ++i) ov[i] = av[i] & bv[i];
    return out;
}

std::size_t count_ones(const BinaryMask& m) {
    std::size_t n = 0;
    for (const auto v : m.values()) n += v;
    return n;
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
    require_same_shape(inner, outer, "is_subset");
    const auto iv = inner.values();
    const auto ov = outer.values();
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (iv[i] > ov[i]) return false;
    }
    return true;
}

std::size_t count_negative(const DensityMap& d) {
    std::size_t n = 0;
    for (const double v : d.values()) n += v < 0.0 ? 1 : 0;
    return n;
}

bool all_finite(std::span<const double> values) {
    for (const double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace bgcount
