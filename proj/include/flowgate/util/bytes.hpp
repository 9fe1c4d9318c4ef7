#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "flowgate/error.hpp"

namespace flowgate::util {

using byte_buffer = std::vector<uint8_t>;

// Sequential little/big-endian reader over a borrowed byte span.
// All read_* calls throw errc::truncated_element when the span runs out;
// callers that need a different kind catch and rethrow.
class byte_reader {
public:
    explicit byte_reader(std::span<const uint8_t> data) : data_(data) {}

    size_t position() const noexcept { return pos_; }
    size_t remaining() const noexcept { return data_.size() - pos_; }
    bool empty() const noexcept { return pos_ >= data_.size(); }

    void seek(size_t pos) { pos_ = pos; }

    uint8_t read_u8() { return take(1)[0]; }

    uint16_t read_u16_le() {
        auto b = take(2);
        return static_cast<uint16_t>(b[0] | (b[1] << 8));
    }

    uint32_t read_u32_le() {
        auto b = take(4);
        return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
               (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
    }

    uint16_t read_u16_be() {
        auto b = take(2);
        return static_cast<uint16_t>((b[0] << 8) | b[1]);
    }

    uint32_t read_u32_be() {
        auto b = take(4);
        return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
               (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
    }

    std::span<const uint8_t> read_bytes(size_t n) { return take(n); }

    std::string read_string(size_t n) {
        auto b = take(n);
        return std::string(reinterpret_cast<const char*>(b.data()), b.size());
    }

    void skip(size_t n) { take(n); }

private:
    std::span<const uint8_t> take(size_t n) {
        if (pos_ + n > data_.size()) {
            raise(errc::truncated_element,
                  "need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_) +
                      ", have " + std::to_string(data_.size() - pos_));
        }
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

class byte_writer {
public:
    byte_buffer take() { return std::move(out_); }
    const byte_buffer& buffer() const noexcept { return out_; }
    size_t size() const noexcept { return out_.size(); }

    void write_u8(uint8_t v) { out_.push_back(v); }

    void write_u16_le(uint16_t v) {
        out_.push_back(static_cast<uint8_t>(v & 0xFF));
        out_.push_back(static_cast<uint8_t>(v >> 8));
    }

    void write_u32_le(uint32_t v) {
        out_.push_back(static_cast<uint8_t>(v & 0xFF));
        out_.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
        out_.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
        out_.push_back(static_cast<uint8_t>((v >> 24) & 0xFF));
    }

    void write_u16_be(uint16_t v) {
        out_.push_back(static_cast<uint8_t>(v >> 8));
        out_.push_back(static_cast<uint8_t>(v & 0xFF));
    }

    void write_u32_be(uint32_t v) {
        out_.push_back(static_cast<uint8_t>((v >> 24) & 0xFF));
        out_.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
        out_.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
        out_.push_back(static_cast<uint8_t>(v & 0xFF));
    }

    void write_bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    void write_string(std::string_view s) {
        out_.insert(out_.end(), s.begin(), s.end());
    }

    // Overwrites 4 bytes at `at` with a little-endian length; used to patch
    // group lengths after the group body is known.
    void patch_u32_le(size_t at, uint32_t v) {
        out_[at] = static_cast<uint8_t>(v & 0xFF);
        out_[at + 1] = static_cast<uint8_t>((v >> 8) & 0xFF);
        out_[at + 2] = static_cast<uint8_t>((v >> 16) & 0xFF);
        out_[at + 3] = static_cast<uint8_t>((v >> 24) & 0xFF);
    }

private:
    byte_buffer out_;
};

inline byte_buffer to_bytes(std::string_view s) {
    return byte_buffer(s.begin(), s.end());
}

inline std::string to_string(std::span<const uint8_t> b) {
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

}  // namespace flowgate::util
