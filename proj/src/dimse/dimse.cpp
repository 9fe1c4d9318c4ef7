#include "flowgate/dimse/dimse.hpp"

#include <algorithm>

#include "flowgate/dicom/codec.hpp"
#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/error.hpp"

namespace flowgate::dimse {

using dicom::data_set;
using dicom::tags::affected_sop_class_uid;
using dicom::tags::affected_sop_instance_uid;
using dicom::tags::command_data_set_type;
using dicom::tags::command_field;
using dicom::tags::command_group_length;
using dicom::tags::message_id;
using dicom::tags::message_id_responded_to;
using dicom::vr;

namespace {

constexpr size_t kMaxPduSanity = 64 * 1024 * 1024;

// (0000,0000) carries the byte count of everything after it.
util::byte_buffer with_group_length(data_set command_set) {
    command_set.remove(command_group_length);
    auto body = dicom::serialize_dataset(command_set, dicom::uids::implicit_vr_le);
    command_set.set_u32(command_group_length, vr::UL, static_cast<uint32_t>(body.size()));
    return dicom::serialize_dataset(command_set, dicom::uids::implicit_vr_le);
}

}  // namespace

data_set build_c_store_rq(uint16_t id, const std::string& sop_class,
                          const std::string& sop_instance) {
    data_set c;
    c.set_string(affected_sop_class_uid, vr::UI, sop_class);
    c.set_u16(command_field, vr::US, command::c_store_rq);
    c.set_u16(message_id, vr::US, id);
    c.set_u16(command_data_set_type, vr::US, command::data_set_present);
    c.set_string(affected_sop_instance_uid, vr::UI, sop_instance);
    return c;
}

data_set build_c_store_rsp(const dimse_command& rq, uint16_t store_status) {
    data_set c;
    c.set_string(affected_sop_class_uid, vr::UI, rq.sop_class_uid);
    c.set_u16(command_field, vr::US, command::c_store_rsp);
    c.set_u16(message_id_responded_to, vr::US, rq.message_id);
    c.set_u16(command_data_set_type, vr::US, command::no_data_set);
    c.set_u16(dicom::tags::status, vr::US, store_status);
    c.set_string(affected_sop_instance_uid, vr::UI, rq.sop_instance_uid);
    return c;
}

data_set build_c_echo_rsp(const dimse_command& rq) {
    data_set c;
    c.set_string(affected_sop_class_uid, vr::UI, std::string(dicom::uids::verification));
    c.set_u16(command_field, vr::US, command::c_echo_rsp);
    c.set_u16(message_id_responded_to, vr::US, rq.message_id);
    c.set_u16(command_data_set_type, vr::US, command::no_data_set);
    c.set_u16(dicom::tags::status, vr::US, status::success);
    return c;
}

util::byte_buffer serialize_command(const data_set& command_set) {
    return with_group_length(command_set);
}

dimse_command parse_command(std::span<const uint8_t> bytes) {
    auto ds = dicom::parse_dataset(bytes, dicom::uids::implicit_vr_le);
    dimse_command c;
    c.command_field = ds.get_u16(command_field).value_or(0);
    c.message_id = ds.get_u16(message_id).value_or(0);
    c.responded_to = ds.get_u16(message_id_responded_to).value_or(0);
    c.command_status = ds.get_u16(dicom::tags::status).value_or(0);
    c.has_dataset = ds.get_u16(command_data_set_type).value_or(command::no_data_set) !=
                    command::no_data_set;
    c.sop_class_uid = ds.get_string_or(affected_sop_class_uid, "");
    c.sop_instance_uid = ds.get_string_or(affected_sop_instance_uid, "");
    return c;
}

std::optional<pdu> read_pdu(util::tcp_socket& sock) {
    uint8_t header[6];
    if (!sock.recv_exact(header)) return std::nullopt;
    uint32_t length = (static_cast<uint32_t>(header[2]) << 24) |
                      (static_cast<uint32_t>(header[3]) << 16) |
                      (static_cast<uint32_t>(header[4]) << 8) | header[5];
    if (length > kMaxPduSanity) {
        raise(errc::protocol_error, "PDU length " + std::to_string(length) + " over sanity cap");
    }
    util::byte_buffer whole(6 + length);
    std::copy(header, header + 6, whole.begin());
    if (length > 0 && !sock.recv_exact(std::span<uint8_t>(whole).subspan(6))) {
        raise(errc::protocol_error, "peer closed mid-PDU");
    }
    return decode_pdu(whole);
}

void write_pdu(util::tcp_socket& sock, const pdu& p) {
    sock.send_all(encode_pdu(p));
}

std::vector<pdv> fragment(uint8_t context_id, bool is_command,
                          std::span<const uint8_t> payload, uint32_t max_pdu_length) {
    // Each PDV costs 6 bytes (4 length + context id + control header); keep
    // whole PDUs within the peer's limit.
    size_t chunk = max_pdu_length > 6 ? max_pdu_length - 6 : 1024;
    std::vector<pdv> out;
    size_t offset = 0;
    do {
        size_t n = std::min(chunk, payload.size() - offset);
        pdv v;
        v.context_id = context_id;
        v.command = is_command;
        v.last = (offset + n == payload.size());
        v.data.assign(payload.begin() + offset, payload.begin() + offset + n);
        out.push_back(std::move(v));
        offset += n;
    } while (offset < payload.size());
    return out;
}

std::variant<associate_ac, associate_rj> negotiate_accept(const associate_rq& rq,
                                                          const scp_config& config) {
    bool known = std::any_of(config.served_ae_titles.begin(), config.served_ae_titles.end(),
                             [&](const ae_title& t) { return t == rq.called; });
    if (!known) {
        associate_rj rj;
        rj.result = 1;
        rj.source = 1;
        rj.reason = associate_rj::reason_called_ae_not_recognized;
        return rj;
    }

    std::vector<std::string> supported_ts = config.transfer_syntaxes;
    if (supported_ts.empty()) {
        supported_ts = {std::string(dicom::uids::implicit_vr_le),
                        std::string(dicom::uids::explicit_vr_le)};
    }

    associate_ac ac;
    ac.called = rq.called;
    ac.calling = rq.calling;
    ac.application_context = rq.application_context;
    ac.max_pdu_length = config.max_pdu_length;
    ac.implementation_class = std::string(dicom::uids::implementation_class);
    ac.implementation_version = std::string(dicom::uids::implementation_version);

    for (const auto& proposed : rq.contexts) {
        presentation_context_ac result_ctx;
        result_ctx.id = proposed.id;

        bool abstract_ok = config.abstract_syntaxes.empty() ||
                           std::find(config.abstract_syntaxes.begin(),
                                     config.abstract_syntaxes.end(),
                                     proposed.abstract_syntax) != config.abstract_syntaxes.end();
        if (!abstract_ok) {
            result_ctx.result = 3;  // abstract syntax not supported
            ac.contexts.push_back(std::move(result_ctx));
            continue;
        }
        auto ts = std::find_if(proposed.transfer_syntaxes.begin(),
                               proposed.transfer_syntaxes.end(), [&](const std::string& t) {
                                   return std::find(supported_ts.begin(), supported_ts.end(), t) !=
                                          supported_ts.end();
                               });
        if (ts == proposed.transfer_syntaxes.end()) {
            result_ctx.result = 4;  // transfer syntaxes not supported
        } else {
            result_ctx.result = 0;
            result_ctx.transfer_syntax = *ts;
        }
        ac.contexts.push_back(std::move(result_ctx));
    }
    return ac;
}

}  // namespace flowgate::dimse
