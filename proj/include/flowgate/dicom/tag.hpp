#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace flowgate::dicom {

// (group, element) pair ordered lexicographically; group 0002 is file meta,
// odd groups are private.
struct tag {
    uint16_t group = 0;
    uint16_t element = 0;

    constexpr tag() = default;
    constexpr tag(uint16_t g, uint16_t e) : group(g), element(e) {}

    constexpr auto operator<=>(const tag&) const = default;

    constexpr bool is_file_meta() const { return group == 0x0002; }
    constexpr bool is_private() const { return (group & 1) != 0; }
    constexpr bool is_command() const { return group == 0x0000; }

    std::string to_string() const {
        char buf[16];
        snprintf(buf, sizeof(buf), "(%04X,%04X)", group, element);
        return buf;
    }
};

// Parses "(gggg,eeee)" (case-insensitive hex); returns false on malformed input.
bool parse_tag(std::string_view text, tag& out);

}  // namespace flowgate::dicom
