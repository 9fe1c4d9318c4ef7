#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>

#include "flowgate/hl7/message.hpp"
#include "flowgate/util/bytes.hpp"
#include "flowgate/util/net.hpp"

namespace flowgate::hl7 {

// MLLP block: 0x0B payload 0x1C 0x0D.
util::byte_buffer mllp_frame(std::span<const uint8_t> payload);

// Throws errc::bad_frame when the start/end bytes are missing.
util::byte_buffer mllp_unframe(std::span<const uint8_t> block);

enum class ack_disposition { aa, ae, ar, timed_out };
const char* ack_name(ack_disposition a);

// Frames and sends one message, then reads one framed response and returns
// the MSA-1 disposition. A silent peer yields timed_out; an unreachable one
// throws errc::connection_refused; garbage responses throw errc::bad_frame.
ack_disposition mllp_send(const std::string& host, uint16_t port, const hl7_message& msg,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));

// Reads one MLLP frame off a socket (shared with the interface-engine
// simulator). nullopt on clean EOF before a frame starts.
std::optional<util::byte_buffer> read_mllp_frame(util::tcp_socket& sock);

}  // namespace flowgate::hl7
