#include "flowgate/dimse/pdu.hpp"

#include "flowgate/error.hpp"

namespace flowgate::dimse {

namespace {

constexpr uint8_t kTypeAssociateRq = 0x01;
constexpr uint8_t kTypeAssociateAc = 0x02;
constexpr uint8_t kTypeAssociateRj = 0x03;
constexpr uint8_t kTypeDataTf = 0x04;
constexpr uint8_t kTypeReleaseRq = 0x05;
constexpr uint8_t kTypeReleaseRp = 0x06;
constexpr uint8_t kTypeAbort = 0x07;

constexpr uint8_t kItemApplicationContext = 0x10;
constexpr uint8_t kItemPresentationContextRq = 0x20;
constexpr uint8_t kItemPresentationContextAc = 0x21;
constexpr uint8_t kItemAbstractSyntax = 0x30;
constexpr uint8_t kItemTransferSyntax = 0x40;
constexpr uint8_t kItemUserInfo = 0x50;
constexpr uint8_t kSubItemMaxLength = 0x51;
constexpr uint8_t kSubItemImplementationClass = 0x52;
constexpr uint8_t kSubItemImplementationVersion = 0x55;

void write_item(util::byte_writer& w, uint8_t type, std::string_view body) {
    w.write_u8(type);
    w.write_u8(0);
    w.write_u16_be(static_cast<uint16_t>(body.size()));
    w.write_string(body);
}

void write_item(util::byte_writer& w, uint8_t type, const util::byte_buffer& body) {
    w.write_u8(type);
    w.write_u8(0);
    w.write_u16_be(static_cast<uint16_t>(body.size()));
    w.write_bytes(body);
}

template <typename ContextWriter>
util::byte_buffer encode_associate_common(uint16_t protocol_version, const ae_title& called,
                                          const ae_title& calling,
                                          const std::string& application_context,
                                          ContextWriter&& write_contexts, uint32_t max_pdu_length,
                                          const std::string& implementation_class,
                                          const std::string& implementation_version) {
    util::byte_writer w;
    w.write_u16_be(protocol_version);
    w.write_u16_be(0);
    w.write_string(called.padded());
    w.write_string(calling.padded());
    for (int i = 0; i < 32; ++i) w.write_u8(0);

    write_item(w, kItemApplicationContext, application_context);
    write_contexts(w);

    util::byte_writer user;
    {
        util::byte_writer max_len;
        max_len.write_u32_be(max_pdu_length);
        write_item(user, kSubItemMaxLength, max_len.take());
        write_item(user, kSubItemImplementationClass, implementation_class);
        if (!implementation_version.empty()) {
            write_item(user, kSubItemImplementationVersion, implementation_version);
        }
    }
    write_item(w, kItemUserInfo, user.take());
    return w.take();
}

struct associate_fields {
    uint16_t protocol_version = 1;
    ae_title called;
    ae_title calling;
    std::string application_context;
    uint32_t max_pdu_length = 16384;
    std::string implementation_class;
    std::string implementation_version;
};

// Parses the fixed part + items shared by RQ and AC; context items are
// handed to the supplied callback.
template <typename ContextHandler>
associate_fields decode_associate_common(util::byte_reader& r, ContextHandler&& on_context) {
    associate_fields f;
    f.protocol_version = r.read_u16_be();
    r.skip(2);
    f.called = ae_title::from_wire(r.read_string(16));
    f.calling = ae_title::from_wire(r.read_string(16));
    r.skip(32);

    while (!r.empty()) {
        uint8_t type = r.read_u8();
        r.skip(1);
        uint16_t len = r.read_u16_be();
        auto body = r.read_bytes(len);
        switch (type) {
            case kItemApplicationContext:
                f.application_context = util::to_string(body);
                break;
            case kItemPresentationContextRq:
            case kItemPresentationContextAc:
                on_context(type, body);
                break;
            case kItemUserInfo: {
                util::byte_reader u(body);
                while (!u.empty()) {
                    uint8_t sub = u.read_u8();
                    u.skip(1);
                    uint16_t sublen = u.read_u16_be();
                    auto subbody = u.read_bytes(sublen);
                    if (sub == kSubItemMaxLength && sublen == 4) {
                        util::byte_reader m(subbody);
                        f.max_pdu_length = m.read_u32_be();
                    } else if (sub == kSubItemImplementationClass) {
                        f.implementation_class = util::to_string(subbody);
                    } else if (sub == kSubItemImplementationVersion) {
                        f.implementation_version = util::to_string(subbody);
                    }
                    // other user-info sub-items tolerated and ignored
                }
                break;
            }
            default:
                break;  // unknown item tolerated
        }
    }
    return f;
}

util::byte_buffer encode_payload(const associate_rq& rq) {
    return encode_associate_common(
        rq.protocol_version, rq.called, rq.calling, rq.application_context,
        [&](util::byte_writer& w) {
            for (const auto& ctx : rq.contexts) {
                util::byte_writer body;
                body.write_u8(ctx.id);
                body.write_u8(0);
                body.write_u8(0);
                body.write_u8(0);
                write_item(body, kItemAbstractSyntax, ctx.abstract_syntax);
                for (const auto& ts : ctx.transfer_syntaxes) {
                    write_item(body, kItemTransferSyntax, ts);
                }
                write_item(w, kItemPresentationContextRq, body.take());
            }
        },
        rq.max_pdu_length, rq.implementation_class, rq.implementation_version);
}

util::byte_buffer encode_payload(const associate_ac& ac) {
    return encode_associate_common(
        ac.protocol_version, ac.called, ac.calling, ac.application_context,
        [&](util::byte_writer& w) {
            for (const auto& ctx : ac.contexts) {
                util::byte_writer body;
                body.write_u8(ctx.id);
                body.write_u8(0);
                body.write_u8(ctx.result);
                body.write_u8(0);
                write_item(body, kItemTransferSyntax, ctx.transfer_syntax);
                write_item(w, kItemPresentationContextAc, body.take());
            }
        },
        ac.max_pdu_length, ac.implementation_class, ac.implementation_version);
}

pdu decode_associate_rq(util::byte_reader& r) {
    associate_rq rq;
    auto f = decode_associate_common(r, [&](uint8_t, std::span<const uint8_t> body) {
        util::byte_reader c(body);
        presentation_context_rq ctx;
        ctx.id = c.read_u8();
        c.skip(3);
        while (!c.empty()) {
            uint8_t sub = c.read_u8();
            c.skip(1);
            uint16_t sublen = c.read_u16_be();
            auto subbody = c.read_bytes(sublen);
            if (sub == kItemAbstractSyntax) {
                ctx.abstract_syntax = util::to_string(subbody);
            } else if (sub == kItemTransferSyntax) {
                ctx.transfer_syntaxes.push_back(util::to_string(subbody));
            }
        }
        rq.contexts.push_back(std::move(ctx));
    });
    rq.protocol_version = f.protocol_version;
    rq.called = f.called;
    rq.calling = f.calling;
    rq.application_context = f.application_context;
    rq.max_pdu_length = f.max_pdu_length;
    rq.implementation_class = f.implementation_class;
    rq.implementation_version = f.implementation_version;
    return rq;
}

pdu decode_associate_ac(util::byte_reader& r) {
    associate_ac ac;
    auto f = decode_associate_common(r, [&](uint8_t, std::span<const uint8_t> body) {
        util::byte_reader c(body);
        presentation_context_ac ctx;
        ctx.id = c.read_u8();
        c.skip(1);
        ctx.result = c.read_u8();
        c.skip(1);
        while (!c.empty()) {
            uint8_t sub = c.read_u8();
            c.skip(1);
            uint16_t sublen = c.read_u16_be();
            auto subbody = c.read_bytes(sublen);
            if (sub == kItemTransferSyntax) {
                ctx.transfer_syntax = util::to_string(subbody);
            }
        }
        ac.contexts.push_back(std::move(ctx));
    });
    ac.protocol_version = f.protocol_version;
    ac.called = f.called;
    ac.calling = f.calling;
    ac.application_context = f.application_context;
    ac.max_pdu_length = f.max_pdu_length;
    ac.implementation_class = f.implementation_class;
    ac.implementation_version = f.implementation_version;
    return ac;
}

}  // namespace

util::byte_buffer encode_pdu(const pdu& p) {
    uint8_t type = 0;
    util::byte_buffer payload;

    if (const auto* rq = std::get_if<associate_rq>(&p)) {
        type = kTypeAssociateRq;
        payload = encode_payload(*rq);
    } else if (const auto* ac = std::get_if<associate_ac>(&p)) {
        type = kTypeAssociateAc;
        payload = encode_payload(*ac);
    } else if (const auto* rj = std::get_if<associate_rj>(&p)) {
        type = kTypeAssociateRj;
        payload = {0, rj->result, rj->source, rj->reason};
    } else if (const auto* data = std::get_if<p_data_tf>(&p)) {
        type = kTypeDataTf;
        util::byte_writer w;
        for (const auto& v : data->values) {
            w.write_u32_be(static_cast<uint32_t>(v.data.size() + 2));
            w.write_u8(v.context_id);
            uint8_t header = 0;
            if (v.command) header |= 0x01;
            if (v.last) header |= 0x02;
            w.write_u8(header);
            w.write_bytes(v.data);
        }
        payload = w.take();
    } else if (std::holds_alternative<release_rq>(p)) {
        type = kTypeReleaseRq;
        payload = {0, 0, 0, 0};
    } else if (std::holds_alternative<release_rp>(p)) {
        type = kTypeReleaseRp;
        payload = {0, 0, 0, 0};
    } else if (const auto* ab = std::get_if<a_abort>(&p)) {
        type = kTypeAbort;
        payload = {0, 0, ab->source, ab->reason};
    }

    if (payload.size() > 0xFFFFFFFFull) {
        raise(errc::oversized_pdu, "payload of " + std::to_string(payload.size()) + " bytes");
    }

    util::byte_writer w;
    w.write_u8(type);
    w.write_u8(0);
    w.write_u32_be(static_cast<uint32_t>(payload.size()));
    w.write_bytes(payload);
    return w.take();
}

pdu decode_pdu(std::span<const uint8_t> bytes) {
    if (bytes.size() < 6) {
        raise(errc::length_mismatch, "PDU header needs 6 bytes, have " + std::to_string(bytes.size()));
    }
    util::byte_reader r(bytes);
    uint8_t type = r.read_u8();
    r.skip(1);
    uint32_t length = r.read_u32_be();
    if (length != bytes.size() - 6) {
        raise(errc::length_mismatch,
              "declared " + std::to_string(length) + " bytes, have " +
                  std::to_string(bytes.size() - 6));
    }

    try {
        switch (type) {
            case kTypeAssociateRq:
                return decode_associate_rq(r);
            case kTypeAssociateAc:
                return decode_associate_ac(r);
            case kTypeAssociateRj: {
                r.skip(1);
                associate_rj rj;
                rj.result = r.read_u8();
                rj.source = r.read_u8();
                rj.reason = r.read_u8();
                return rj;
            }
            case kTypeDataTf: {
                p_data_tf data;
                while (!r.empty()) {
                    uint32_t item_len = r.read_u32_be();
                    if (item_len < 2) raise(errc::length_mismatch, "PDV item too short");
                    pdv v;
                    v.context_id = r.read_u8();
                    uint8_t header = r.read_u8();
                    v.command = (header & 0x01) != 0;
                    v.last = (header & 0x02) != 0;
                    auto body = r.read_bytes(item_len - 2);
                    v.data.assign(body.begin(), body.end());
                    data.values.push_back(std::move(v));
                }
                return data;
            }
            case kTypeReleaseRq:
                return release_rq {};
            case kTypeReleaseRp:
                return release_rp {};
            case kTypeAbort: {
                r.skip(2);
                a_abort ab;
                ab.source = r.read_u8();
                ab.reason = r.read_u8();
                return ab;
            }
            default:
                raise(errc::unknown_pdu_type, "type byte " + std::to_string(type));
        }
    } catch (const error& e) {
        if (e.kind() == errc::truncated_element) {
            raise(errc::length_mismatch, e.what());
        }
        throw;
    }
}

}  // namespace flowgate::dimse
