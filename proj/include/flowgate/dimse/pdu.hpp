#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "flowgate/dimse/ae_title.hpp"
#include "flowgate/util/bytes.hpp"

namespace flowgate::dimse {

// Upper-layer PDUs (PS3.8 subset). Type bytes: 0x01 A-ASSOCIATE-RQ,
// 0x02 -AC, 0x03 -RJ, 0x04 P-DATA-TF, 0x05 A-RELEASE-RQ, 0x06 A-RELEASE-RP,
// 0x07 A-ABORT. Header: type(1) reserved(1) length(4, big-endian).

struct presentation_context_rq {
    uint8_t id = 1;  // odd, unique within the association
    std::string abstract_syntax;
    std::vector<std::string> transfer_syntaxes;

    bool operator==(const presentation_context_rq&) const = default;
};

// Result values: 0 acceptance, 3 abstract-syntax-not-supported,
// 4 transfer-syntaxes-not-supported.
struct presentation_context_ac {
    uint8_t id = 1;
    uint8_t result = 0;
    std::string transfer_syntax;  // exactly one when accepted

    bool accepted() const noexcept { return result == 0; }
    bool operator==(const presentation_context_ac&) const = default;
};

struct associate_rq {
    uint16_t protocol_version = 1;
    ae_title called;
    ae_title calling;
    std::string application_context;
    std::vector<presentation_context_rq> contexts;
    uint32_t max_pdu_length = 16384;
    std::string implementation_class;
    std::string implementation_version;

    bool operator==(const associate_rq&) const = default;
};

struct associate_ac {
    uint16_t protocol_version = 1;
    ae_title called;   // echoed
    ae_title calling;  // echoed
    std::string application_context;
    std::vector<presentation_context_ac> contexts;
    uint32_t max_pdu_length = 16384;
    std::string implementation_class;
    std::string implementation_version;

    const presentation_context_ac* find_context(uint8_t id) const {
        for (const auto& c : contexts) {
            if (c.id == id) return &c;
        }
        return nullptr;
    }

    bool operator==(const associate_ac&) const = default;
};

struct associate_rj {
    uint8_t result = 1;  // 1 rejected-permanent, 2 rejected-transient
    uint8_t source = 1;  // 1 service-user
    uint8_t reason = 1;  // with source 1: 7 = called-AE-title-not-recognized

    bool operator==(const associate_rj&) const = default;

    static constexpr uint8_t reason_called_ae_not_recognized = 7;
};

// One presentation-data-value: command or dataset fragment.
struct pdv {
    uint8_t context_id = 1;
    bool command = false;
    bool last = false;
    util::byte_buffer data;

    bool operator==(const pdv&) const = default;
};

struct p_data_tf {
    std::vector<pdv> values;

    bool operator==(const p_data_tf&) const = default;
};

struct release_rq {
    bool operator==(const release_rq&) const = default;
};

struct release_rp {
    bool operator==(const release_rp&) const = default;
};

struct a_abort {
    uint8_t source = 0;  // 0 service-user, 2 service-provider
    uint8_t reason = 0;

    bool operator==(const a_abort&) const = default;
};

using pdu = std::variant<associate_rq, associate_ac, associate_rj, p_data_tf, release_rq,
                         release_rp, a_abort>;

util::byte_buffer encode_pdu(const pdu& p);

// Throws errc::unknown_pdu_type / errc::length_mismatch.
pdu decode_pdu(std::span<const uint8_t> bytes);

}  // namespace flowgate::dimse
