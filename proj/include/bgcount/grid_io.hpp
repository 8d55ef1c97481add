#pragma once

// Binary density (.dmap) and mask (.mask) files.
//
// Layout, all little-endian:
//   magic    4 bytes  "DMAP" or "MASK"
//   version  u16      = 1
//   height   u32
//   width    u32
//   payload  height*width f32 (density) or u8 in {0,1} (mask), row-major
//
// Density values are held as f64 in memory and stored as f32, so a map
// survives write->read bit-exactly when its values are f32-representable.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "bgcount/byte_io.hpp"
#include "bgcount/grid.hpp"

namespace bgcount {

inline constexpr std::uint16_t kGridFormatVersion = 1;

struct DensityReadInfo {
    std::size_t negative_values = 0;  // preserved, reported
};

Bytes encode_density(const DensityMap& d);
DensityMap decode_density(std::span<const std::uint8_t> bytes, DensityReadInfo* info = nullptr);

Bytes encode_mask(const BinaryMask& m);
BinaryMask decode_mask(std::span<const std::uint8_t> bytes);

void write_density(const std::filesystem::path& path, const DensityMap& d);
DensityMap read_density(const std::filesystem::path& path, DensityReadInfo* info = nullptr);

void write_mask(const std::filesystem::path& path, const BinaryMask& m);
BinaryMask read_mask(const std::filesystem::path& path);

}  // namespace bgcount
