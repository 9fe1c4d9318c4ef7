#include "flowgate/dimse/scu.hpp"

#include <algorithm>
#include <map>

#include "flowgate/dicom/codec.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/dimse/dimse.hpp"
#include "flowgate/error.hpp"
#include "flowgate/util/net.hpp"

namespace flowgate::dimse {

namespace {

// Waits for the next P-DATA command PDV carrying the C-STORE-RSP.
dimse_command await_store_rsp(util::tcp_socket& sock) {
    util::byte_buffer command_bytes;
    while (true) {
        auto p = read_pdu(sock);
        if (!p) raise(errc::protocol_error, "peer closed while awaiting C-STORE-RSP");
        if (auto* ab = std::get_if<a_abort>(&*p)) {
            raise(errc::peer_abort, "A-ABORT source " + std::to_string(ab->source));
        }
        auto* data = std::get_if<p_data_tf>(&*p);
        if (data == nullptr) raise(errc::protocol_error, "unexpected PDU while awaiting response");
        for (const auto& v : data->values) {
            if (!v.command) continue;
            command_bytes.insert(command_bytes.end(), v.data.begin(), v.data.end());
            if (v.last) return parse_command(command_bytes);
        }
    }
}

}  // namespace

std::vector<store_result> scu_store(const store_endpoint& endpoint, const ae_title& calling,
                                    const ae_title& called,
                                    const std::vector<dicom::dicom_file>& files,
                                    const scu_options& options) {
    auto sock = util::tcp_socket::connect(endpoint.host, endpoint.port);
    sock.set_receive_timeout(options.response_timeout);

    // One context per distinct (SOP class, transfer syntax) pair.
    std::map<std::pair<std::string, std::string>, uint8_t> context_ids;
    associate_rq rq;
    rq.called = called;
    rq.calling = calling;
    rq.application_context = std::string(dicom::uids::application_context);
    rq.max_pdu_length = options.max_pdu_length;
    rq.implementation_class = std::string(dicom::uids::implementation_class);
    rq.implementation_version = std::string(dicom::uids::implementation_version);

    uint8_t next_id = 1;
    for (const auto& f : files) {
        auto key = std::make_pair(f.sop_class_uid(), f.transfer_syntax);
        if (key.first.empty()) continue;  // handled per file below
        if (context_ids.emplace(key, next_id).second) {
            presentation_context_rq ctx;
            ctx.id = next_id;
            ctx.abstract_syntax = key.first;
            ctx.transfer_syntaxes = {key.second};
            rq.contexts.push_back(std::move(ctx));
            next_id = static_cast<uint8_t>(next_id + 2);
        }
    }
    if (rq.contexts.empty()) {
        raise(errc::invariant_violation, "no file provides a SOP class to negotiate");
    }

    write_pdu(sock, rq);
    auto reply = read_pdu(sock);
    if (!reply) raise(errc::protocol_error, "peer closed during negotiation");
    if (auto* rj = std::get_if<associate_rj>(&*reply)) {
        raise(errc::association_rejected,
              "result " + std::to_string(rj->result) + " source " + std::to_string(rj->source) +
                  " reason " + std::to_string(rj->reason));
    }
    if (std::get_if<a_abort>(&*reply) != nullptr) {
        raise(errc::peer_abort, "A-ABORT during negotiation");
    }
    auto* ac = std::get_if<associate_ac>(&*reply);
    if (ac == nullptr) raise(errc::protocol_error, "unexpected PDU during negotiation");

    uint32_t peer_max = ac->max_pdu_length;
    if (peer_max == 0) peer_max = 1024 * 1024;  // 0 means unlimited; cap it
    peer_max = std::min(peer_max, 1024u * 1024u);

    std::vector<store_result> results;
    uint16_t message_id = 1;
    for (const auto& f : files) {
        store_result res;
        res.sop_instance_uid = f.sop_instance_uid();

        auto key = std::make_pair(f.sop_class_uid(), f.transfer_syntax);
        auto it = context_ids.find(key);
        const presentation_context_ac* ctx =
            it == context_ids.end() ? nullptr : ac->find_context(it->second);
        if (ctx == nullptr || !ctx->accepted()) {
            res.status = status::refused_sop_class_not_supported;
            results.push_back(std::move(res));
            continue;
        }

        auto command_bytes =
            serialize_command(build_c_store_rq(message_id, f.sop_class_uid(), f.sop_instance_uid()));
        auto dataset_bytes = dicom::serialize_dataset(f.dataset, ctx->transfer_syntax);

        p_data_tf command_pdu;
        command_pdu.values = fragment(ctx->id, true, command_bytes, peer_max);
        write_pdu(sock, command_pdu);
        for (auto& v : fragment(ctx->id, false, dataset_bytes, peer_max)) {
            p_data_tf data_pdu;
            data_pdu.values.push_back(std::move(v));
            write_pdu(sock, data_pdu);
        }

        auto rsp = await_store_rsp(sock);
        if (rsp.command_field != command::c_store_rsp || rsp.responded_to != message_id) {
            raise(errc::protocol_error, "mismatched C-STORE-RSP");
        }
        res.status = rsp.command_status;
        results.push_back(std::move(res));
        ++message_id;
    }

    write_pdu(sock, release_rq {});
    while (true) {
        auto p = read_pdu(sock);
        if (!p) break;  // peer closed without RP; release already sent
        if (std::holds_alternative<release_rp>(*p)) break;
        if (std::holds_alternative<a_abort>(*p)) break;
    }
    return results;
}

}  // namespace flowgate::dimse
