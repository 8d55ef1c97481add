#include "bgcount/grid_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace bgcount {

Bytes read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

namespace {

constexpr std::uint64_t kMaxDim = std::numeric_limits<std::uint32_t>::max();

void write_header(ByteWriter& w, const char* magic, std::size_t height, std::size_t width) {
    if (height > kMaxDim || width > kMaxDim) {
        throw ParameterError("grid dimensions exceed the 32-bit file limit");
    }
    w.magic(magic);
    w.u16(kGridFormatVersion);
    w.u32(static_cast<std::uint32_t>(height));
    w.u32(static_cast<std::uint32_t>(width));
}

std::pair<std::size_t, std::size_t> read_header(ByteReader& r, const char* magic,
                                                std::size_t bytes_per_value) {
    r.expect_magic(magic);
    const std::size_t version_at = r.offset();
    const auto version = r.u16("version");
    if (version != kGridFormatVersion) {
        throw FormatError("unsupported version " + std::to_string(version), version_at);
    }
    const std::size_t height = r.u32("height");
    const std::size_t width = r.u32("width");
    // Divide instead of multiplying so huge headers cannot overflow.
    if (width != 0 && height > r.remaining() / bytes_per_value / width) {
        throw FormatError("truncated payload", r.offset() + r.remaining());
    }
    return {height, width};
}

}  // namespace

Bytes encode_density(const DensityMap& d) {
    ByteWriter w;
    write_header(w, "DMAP", d.height(), d.width());
    for (const double v : d.values()) {
        if (!std::isfinite(v)) throw ParameterError("encode_density: non-finite value");
        w.f32(static_cast<float>(v));
    }
    return w.take();
}

DensityMap decode_density(std::span<const std::uint8_t> bytes, DensityReadInfo* info) {
    ByteReader r(bytes);
    const auto [height, width] = read_header(r, "DMAP", 4);
    std::vector<double> values(height * width);
    std::size_t negatives = 0;
    for (auto& v : values) {
        const std::size_t at = r.offset();
        const float f = r.f32("value");
        if (!std::isfinite(f)) throw FormatError("non-finite density value", at);
        if (f < 0.0f) ++negatives;
        v = static_cast<double>(f);
    }
    r.expect_end();
    if (info != nullptr) info->negative_values = negatives;
    return DensityMap(height, width, std::move(values));
}

Bytes encode_mask(const BinaryMask& m) {
    ByteWriter w;
    write_header(w, "MASK", m.height(), m.width());
    for (const auto v : m.values()) w.u8(v);
    return w.take();
}

BinaryMask decode_mask(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const auto [height, width] = read_header(r, "MASK", 1);
    std::vector<std::uint8_t> values(height * width);
    for (auto& v : values) {
        const std::size_t at = r.offset();
        v = r.u8("value");
        if (v > 1) throw FormatError("mask value " + std::to_string(v) + " not in {0,1}", at);
    }
    r.expect_end();
    return BinaryMask(height, width, std::move(values));
}

void write_density(const std::filesystem::path& path, const DensityMap& d) {
    write_file_bytes(path, encode_density(d));
}

DensityMap read_density(const std::filesystem::path& path, DensityReadInfo* info) {
    const Bytes bytes = read_file_bytes(path);
    return decode_density(bytes, info);
}

void write_mask(const std::filesystem::path& path, const BinaryMask& m) {
    write_file_bytes(path, encode_mask(m));
}

BinaryMask read_mask(const std::filesystem::path& path) {
    const Bytes bytes = read_file_bytes(path);
    return decode_mask(bytes);
}

}  // namespace bgcount
