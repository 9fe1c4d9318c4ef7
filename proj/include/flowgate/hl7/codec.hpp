#pragma once

#include <span>
#include <string>

#include "flowgate/hl7/message.hpp"
#include "flowgate/util/bytes.hpp"

namespace flowgate::hl7 {

// Escape sequences \F\ \S\ \T\ \R\ \E\ for the five delimiter characters.
std::string escape_value(const std::string& value, const delimiters& d);
std::string unescape_value(const std::string& text, const delimiters& d);

// Segments joined by CR; trailing empty fields trimmed per segment (MSH-1/2
// always kept). Throws errc::invariant_violation on structural problems.
util::byte_buffer encode_message(const hl7_message& msg);

// Delimiters come from MSH-1/MSH-2; LF and CRLF terminators are tolerated.
// Throws errc::not_hl7 / errc::bad_delimiters.
hl7_message parse_message(std::span<const uint8_t> bytes);

}  // namespace flowgate::hl7
