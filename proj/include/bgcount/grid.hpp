#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bgcount/errors.hpp"

namespace bgcount {

// Element-domain policies for the grid aliases below.
struct DensityTag {
    static constexpr const char* kName = "density map";
    static constexpr bool valid(double) { return true; }
};
struct RealTag {
    static constexpr const char* kName = "real grid";
    static constexpr bool valid(double) { return true; }
};
struct SoftMaskTag {
    static constexpr const char* kName = "soft mask";
    static constexpr bool valid(double v) { return v >= 0.0 && v <= 1.0; }
};
struct BinaryMaskTag {
    static constexpr const char* kName = "binary mask";
    static constexpr bool valid(std::uint8_t v) { return v <= 1; }
};

/// Dense row-major H x W grid. `Tag` fixes the element domain and keeps
/// density maps, masks and plain real grids from being mixed up.
template <typename T, typename Tag>
class Grid {
public:
    using value_type = T;
    using tag_type = Tag;

    Grid() = default;

    Grid(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), values_(height * width, fill) {
        if (!Tag::valid(fill)) {
            throw ParameterError(std::string(Tag::kName) + ": fill value out of domain");
        }
    }

    Grid(std::size_t height, std::size_t width, std::vector<T> values)
        : height_(height), width_(width), values_(std::move(values)) {
        if (values_.size() != height_ * width_) {
            throw ShapeError(std::string(Tag::kName) + ": " + std::to_string(values_.size()) +
                             " values for a " + std::to_string(height_) + "x" +
                             std::to_string(width_) + " grid");
        }
        for (const T v : values_) {
            if (!Tag::valid(v)) {
                throw ParameterError(std::string(Tag::kName) + ": value out of domain");
            }
        }
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    T operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
    T& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }

    std::span<const T> values() const noexcept { return values_; }
    std::span<T> values() noexcept { return values_; }

    template <typename U, typename OtherTag>
    bool same_shape(const Grid<U, OtherTag>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> values_;
};

using DensityMap = Grid<double, DensityTag>;
using RealGrid = Grid<double, RealTag>;
using SoftMask = Grid<double, SoftMaskTag>;
using BinaryMask = Grid<std::uint8_t, BinaryMaskTag>;

template <typename A, typename TA, typename B, typename TB>
void require_same_shape(const Grid<A, TA>& a, const Grid<B, TB>& b, const char* context) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(context) + ": shape " + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                         std::to_string(b.width()));
    }
}

/// Sum of d(j,k) * m(j,k), accumulated sequentially in row-major order.
/// The order is part of the contract: equal inputs give bitwise-equal counts.
double masked_count(const DensityMap& d, const BinaryMask& m);

/// Sequential row-major sum of all values.
double total(const DensityMap& d);

/// Elementwise product of a density map and a soft mask.
DensityMap hadamard(const DensityMap& d, const SoftMask& m);

BinaryMask all_ones(std::size_t height, std::size_t width);
BinaryMask complement(const BinaryMask& m);
BinaryMask intersect(const BinaryMask& a, const BinaryMask& b);
std::size_t count_ones(const BinaryMask& m);

/// True when every foreground pixel of `inner` is also set in `outer`.
bool is_subset(const BinaryMask& inner, const BinaryMask& outer);

std::size_t count_negative(const DensityMap& d);
bool all_finite(std::span<const double> values);

}  // namespace bgcount
