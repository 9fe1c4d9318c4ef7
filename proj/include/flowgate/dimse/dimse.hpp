#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowgate/dicom/dataset.hpp"
#include "flowgate/dimse/pdu.hpp"
#include "flowgate/util/net.hpp"

namespace flowgate::dimse {

// DIMSE status codes used here.
namespace status {
inline constexpr uint16_t success = 0x0000;
inline constexpr uint16_t refused_out_of_resources = 0xA700;
inline constexpr uint16_t refused_sop_class_not_supported = 0x0122;
inline constexpr uint16_t cannot_understand = 0xC000;
}  // namespace status

// Command field values (PS3.7).
namespace command {
inline constexpr uint16_t c_store_rq = 0x0001;
inline constexpr uint16_t c_store_rsp = 0x8001;
inline constexpr uint16_t c_echo_rq = 0x0030;
inline constexpr uint16_t c_echo_rsp = 0x8030;
inline constexpr uint16_t data_set_present = 0x0000;
inline constexpr uint16_t no_data_set = 0x0101;
}  // namespace command

// Parsed DIMSE command set (always Implicit VR LE on the wire).
struct dimse_command {
    uint16_t command_field = 0;
    uint16_t message_id = 0;           // RQ
    uint16_t responded_to = 0;         // RSP
    uint16_t command_status = 0;       // RSP
    bool has_dataset = false;
    std::string sop_class_uid;
    std::string sop_instance_uid;
};

dicom::data_set build_c_store_rq(uint16_t message_id, const std::string& sop_class,
                                 const std::string& sop_instance);
dicom::data_set build_c_store_rsp(const dimse_command& rq, uint16_t store_status);
dicom::data_set build_c_echo_rsp(const dimse_command& rq);

util::byte_buffer serialize_command(const dicom::data_set& command_set);
dimse_command parse_command(std::span<const uint8_t> bytes);

// Reads one whole PDU off the socket. nullopt on clean EOF before any
// header byte; PDUs above the sanity cap raise errc::protocol_error.
std::optional<pdu> read_pdu(util::tcp_socket& sock);
void write_pdu(util::tcp_socket& sock, const pdu& p);

// Splits a payload into PDVs no larger than the peer's max PDU size.
std::vector<pdv> fragment(uint8_t context_id, bool is_command,
                          std::span<const uint8_t> payload, uint32_t max_pdu_length);

// SCP-side association policy.
struct scp_config {
    std::vector<ae_title> served_ae_titles;
    // Abstract syntaxes accepted; empty means accept every proposed one
    // (router posture — SOP classes are routed, not interpreted).
    std::vector<std::string> abstract_syntaxes;
    std::vector<std::string> transfer_syntaxes;  // defaulted in negotiate_accept
    uint32_t max_pdu_length = 16384;
};

// Unknown called AE -> associate_rj(called-AE-not-recognized); otherwise AC
// accepting, per context, the first proposed transfer syntax in the
// supported set (result 4 when none, 3 when the abstract syntax is refused).
std::variant<associate_ac, associate_rj> negotiate_accept(const associate_rq& rq,
                                                          const scp_config& config);

}  // namespace flowgate::dimse
