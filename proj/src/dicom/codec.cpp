#include "flowgate/dicom/codec.hpp"

#include <array>
#include <utility>

#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/error.hpp"

namespace flowgate::dicom {

namespace {

constexpr uint32_t kUndefinedLength = 0xFFFFFFFF;

struct parse_context {
    bool explicit_vr = false;
    std::vector<std::string>* warnings = nullptr;

    void warn(const std::string& message) const {
        if (warnings != nullptr) warnings->push_back(message);
    }
};

data_set parse_elements(util::byte_reader& r, const parse_context& ctx, bool stop_at_item_delim);

// VRs outside the supported set still need the right length form to keep the
// stream aligned; their values are carried opaquely as UN.
bool foreign_vr_long_form(const char code[2], bool& long_form) {
    static constexpr std::array<std::pair<const char*, bool>, 13> table {{
        {"FL", false}, {"FD", false}, {"AT", false}, {"AS", false}, {"SV", false},
        {"UV", false}, {"OF", true}, {"OD", true}, {"OL", true}, {"OV", true},
        {"UC", true}, {"UR", true}, {"UT", true},
    }};
    for (const auto& [c, lf] : table) {
        if (code[0] == c[0] && code[1] == c[1]) {
            long_form = lf;
            return true;
        }
    }
    return false;
}

std::vector<data_set> parse_items(util::byte_reader& r, const parse_context& ctx,
                                  uint32_t seq_length, bool items_implicit) {
    parse_context item_ctx = ctx;
    if (items_implicit) item_ctx.explicit_vr = false;

    std::vector<data_set> items;
    size_t seq_end = (seq_length == kUndefinedLength) ? SIZE_MAX : r.position() + seq_length;

    while (true) {
        if (seq_length != kUndefinedLength && r.position() >= seq_end) break;
        uint16_t tg = r.read_u16_le();
        uint16_t te = r.read_u16_le();
        tag t(tg, te);
        uint32_t len = r.read_u32_le();
        if (t == tags::sequence_delimiter) {
            if (seq_length != kUndefinedLength) {
                ctx.warn("sequence delimiter inside defined-length sequence");
            }
            break;
        }
        if (t != tags::item) {
            raise(errc::truncated_element, "expected sequence item, found " + t.to_string());
        }
        if (len == kUndefinedLength) {
            items.push_back(parse_elements(r, item_ctx, /*stop_at_item_delim=*/true));
        } else {
            util::byte_reader item_reader(r.read_bytes(len));
            items.push_back(parse_elements(item_reader, item_ctx, false));
        }
    }
    return items;
}

data_element parse_one(util::byte_reader& r, const parse_context& ctx, tag t) {
    vr element_vr = vr::UN;
    uint32_t len = 0;

    if (ctx.explicit_vr) {
        char code[2];
        code[0] = static_cast<char>(r.read_u8());
        code[1] = static_cast<char>(r.read_u8());
        auto parsed = vr_from_code(std::string_view(code, 2));
        bool long_form;
        if (parsed) {
            element_vr = *parsed;
            long_form = vr_uses_long_length(element_vr);
        } else if (foreign_vr_long_form(code, long_form)) {
            ctx.warn("unsupported VR " + std::string(code, 2) + " at " + t.to_string() +
                     " read as UN");
            element_vr = vr::UN;
        } else {
            raise(errc::truncated_element,
                  "unrecognized VR bytes at " + t.to_string());
        }
        if (long_form) {
            r.skip(2);
            len = r.read_u32_le();
        } else {
            len = r.read_u16_le();
        }
    } else {
        element_vr = dict_vr(t);
        len = r.read_u32_le();
    }

    if (len == kUndefinedLength) {
        // Undefined length marks a sequence; UN sequences carry implicit items.
        bool items_implicit = !ctx.explicit_vr || element_vr == vr::UN;
        auto items = parse_items(r, ctx, kUndefinedLength, items_implicit);
        return data_element::sequence(t, std::move(items));
    }
    if (element_vr == vr::SQ) {
        auto items = parse_items(r, ctx, len, /*items_implicit=*/!ctx.explicit_vr);
        return data_element::sequence(t, std::move(items));
    }
    auto bytes = r.read_bytes(len);
    return data_element(t, element_vr, util::byte_buffer(bytes.begin(), bytes.end()));
}

data_set parse_elements(util::byte_reader& r, const parse_context& ctx, bool stop_at_item_delim) {
    data_set out;
    while (!r.empty()) {
        size_t at = r.position();
        uint16_t tg = r.read_u16_le();
        uint16_t te = r.read_u16_le();
        tag t(tg, te);
        if (stop_at_item_delim && t == tags::item_delimiter) {
            r.read_u32_le();
            break;
        }
        if (t == tags::item_delimiter || t == tags::sequence_delimiter) {
            raise(errc::truncated_element,
                  "unexpected delimiter " + t.to_string() + " at offset " + std::to_string(at));
        }
        data_element e = parse_one(r, ctx, t);
        if (out.has(t)) {
            ctx.warn("duplicate tag " + t.to_string() + "; keeping last occurrence");
        }
        out.set(std::move(e));
    }
    return out;
}

void serialize_elements(util::byte_writer& w, const data_set& ds, bool explicit_vr);

util::byte_buffer serialize_items(const std::vector<data_set>& items, bool explicit_vr) {
    util::byte_writer w;
    for (const auto& item : items) {
        util::byte_writer body;
        serialize_elements(body, item, explicit_vr);
        w.write_u16_le(tags::item.group);
        w.write_u16_le(tags::item.element);
        w.write_u32_le(static_cast<uint32_t>(body.size()));
        w.write_bytes(body.buffer());
    }
    return w.take();
}

void serialize_one(util::byte_writer& w, const data_element& e, bool explicit_vr) {
    tag t = e.element_tag();
    w.write_u16_le(t.group);
    w.write_u16_le(t.element);

    if (e.element_vr() == vr::SQ) {
        auto body = serialize_items(e.items(), explicit_vr);
        if (explicit_vr) {
            w.write_string("SQ");
            w.write_u16_le(0);
            w.write_u32_le(static_cast<uint32_t>(body.size()));
        } else {
            w.write_u32_le(static_cast<uint32_t>(body.size()));
        }
        w.write_bytes(body);
        return;
    }

    if (e.value().size() % 2 != 0) {
        raise(errc::invariant_violation,
              "odd value length " + std::to_string(e.value().size()) + " at " + t.to_string());
    }

    if (explicit_vr) {
        w.write_string(vr_code(e.element_vr()));
        if (vr_uses_long_length(e.element_vr())) {
            w.write_u16_le(0);
            w.write_u32_le(static_cast<uint32_t>(e.value().size()));
        } else {
            if (e.value().size() > 0xFFFF) {
                raise(errc::invariant_violation,
                      "value too long for short-form VR at " + t.to_string());
            }
            w.write_u16_le(static_cast<uint16_t>(e.value().size()));
        }
    } else {
        w.write_u32_le(static_cast<uint32_t>(e.value().size()));
    }
    w.write_bytes(e.value());
}

void serialize_elements(util::byte_writer& w, const data_set& ds, bool explicit_vr) {
    for (const auto& e : ds) {
        serialize_one(w, e, explicit_vr);
    }
}

}  // namespace

data_set parse_dataset(std::span<const uint8_t> bytes, std::string_view transfer_syntax,
                       std::vector<std::string>* warnings) {
    if (!uids::is_supported_transfer_syntax(transfer_syntax)) {
        raise(errc::unsupported_transfer_syntax, std::string(transfer_syntax));
    }
    parse_context ctx;
    ctx.explicit_vr = (transfer_syntax == uids::explicit_vr_le);
    ctx.warnings = warnings;
    util::byte_reader r(bytes);
    return parse_elements(r, ctx, false);
}

util::byte_buffer serialize_dataset(const data_set& ds, std::string_view transfer_syntax) {
    if (!uids::is_supported_transfer_syntax(transfer_syntax)) {
        raise(errc::unsupported_transfer_syntax, std::string(transfer_syntax));
    }
    util::byte_writer w;
    serialize_elements(w, ds, transfer_syntax == uids::explicit_vr_le);
    return w.take();
}

}  // namespace flowgate::dicom
