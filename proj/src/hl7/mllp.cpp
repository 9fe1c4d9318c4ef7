#include "flowgate/hl7/mllp.hpp"

#include "flowgate/error.hpp"
#include "flowgate/hl7/codec.hpp"

namespace flowgate::hl7 {

namespace {

constexpr uint8_t kStart = 0x0B;
constexpr uint8_t kEnd1 = 0x1C;
constexpr uint8_t kEnd2 = 0x0D;

}  // namespace

util::byte_buffer mllp_frame(std::span<const uint8_t> payload) {
    util::byte_buffer out;
    out.reserve(payload.size() + 3);
    out.push_back(kStart);
    out.insert(out.end(), payload.begin(), payload.end());
    out.push_back(kEnd1);
    out.push_back(kEnd2);
    return out;
}

util::byte_buffer mllp_unframe(std::span<const uint8_t> block) {
    if (block.size() < 3 || block.front() != kStart || block[block.size() - 2] != kEnd1 ||
        block.back() != kEnd2) {
        raise(errc::bad_frame, "missing MLLP start/end bytes");
    }
    return util::byte_buffer(block.begin() + 1, block.end() - 2);
}

const char* ack_name(ack_disposition a) {
    switch (a) {
        case ack_disposition::aa: return "AA";
        case ack_disposition::ae: return "AE";
        case ack_disposition::ar: return "AR";
        case ack_disposition::timed_out: return "timeout";
    }
    return "?";
}

std::optional<util::byte_buffer> read_mllp_frame(util::tcp_socket& sock) {
    uint8_t b = 0;
    // Scan to the start byte (tolerates stray whitespace between frames).
    while (true) {
        if (!sock.recv_exact(std::span<uint8_t>(&b, 1))) return std::nullopt;
        if (b == kStart) break;
    }
    util::byte_buffer frame {kStart};
    bool saw_end1 = false;
    while (true) {
        if (!sock.recv_exact(std::span<uint8_t>(&b, 1))) {
            raise(errc::bad_frame, "connection closed mid-frame");
        }
        frame.push_back(b);
        if (saw_end1 && b == kEnd2) return frame;
        saw_end1 = (b == kEnd1);
    }
}

ack_disposition mllp_send(const std::string& host, uint16_t port, const hl7_message& msg,
                          std::chrono::milliseconds timeout) {
    auto sock = util::tcp_socket::connect(host, port);
    sock.set_receive_timeout(timeout);
    sock.send_all(mllp_frame(encode_message(msg)));

    std::optional<util::byte_buffer> frame;
    try {
        frame = read_mllp_frame(sock);
    } catch (const error& e) {
        if (e.kind() == errc::timeout) return ack_disposition::timed_out;
        throw;
    }
    if (!frame) raise(errc::bad_frame, "peer closed without an acknowledgement");

    auto ack = parse_message(mllp_unframe(*frame));
    const segment* msa = ack.find("MSA");
    if (msa == nullptr) raise(errc::bad_frame, "acknowledgement lacks MSA");
    std::string code = msa->text(1);
    if (code == "AA") return ack_disposition::aa;
    if (code == "AE") return ack_disposition::ae;
    if (code == "AR") return ack_disposition::ar;
    raise(errc::bad_frame, "unknown MSA-1 '" + code + "'");
}

}  // namespace flowgate::hl7
