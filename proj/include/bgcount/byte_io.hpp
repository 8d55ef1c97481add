#pragma once

// Little-endian encode/decode helpers shared by the binary file formats.

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bgcount/errors.hpp"

namespace bgcount {

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
public:
    void magic(std::string_view tag) {
        for (const char c : tag) buffer_.push_back(static_cast<std::uint8_t>(c));
    }
    void u8(std::uint8_t v) { buffer_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    Bytes take() { return std::move(buffer_); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buffer_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    Bytes buffer_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    void expect_magic(std::string_view tag) {
        need(tag.size(), "magic");
        for (std::size_t i = 0; i < tag.size(); ++i) {
            if (data_[pos_ + i] != static_cast<std::uint8_t>(tag[i])) {
                throw FormatError("bad magic, expected '" + std::string(tag) + "'", pos_ + i);
            }
        }
        pos_ += tag.size();
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return data_[pos_++];
    }
    std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(get(2, what)); }
    std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
    std::uint64_t u64(const char* what) { return get(8, what); }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw FormatError(std::string("truncated payload reading ") + what, data_.size());
        }
    }
    void expect_end() const {
        if (pos_ != data_.size()) throw FormatError("trailing bytes after payload", pos_);
    }

private:
    std::uint64_t get(int n, const char* what) {
        need(static_cast<std::size_t>(n), what);
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

Bytes read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace bgcount
