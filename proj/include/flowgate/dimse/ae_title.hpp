#pragma once

#include <string>
#include <string_view>

namespace flowgate::dimse {

// Application Entity Title: 1–16 characters drawn from uppercase letters,
// digits, space, underscore, hyphen; never empty or all spaces. Encodes as
// exactly 16 space-padded bytes on the wire.
class ae_title {
public:
    ae_title() = default;

    // Throws errc::invariant_violation on invalid titles.
    static ae_title parse(std::string_view text);

    // Decodes a 16-byte wire field (trailing spaces stripped).
    static ae_title from_wire(std::string_view field);

    const std::string& value() const noexcept { return value_; }
    std::string padded() const;  // 16 bytes

    bool operator==(const ae_title&) const = default;

private:
    std::string value_;
};

}  // namespace flowgate::dimse
