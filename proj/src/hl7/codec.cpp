#include "flowgate/hl7/codec.hpp"

#include "flowgate/error.hpp"

namespace flowgate::hl7 {

namespace {

constexpr char kCr = '\r';

char escape_letter(char c, const delimiters& d) {
    if (c == d.field) return 'F';
    if (c == d.component) return 'S';
    if (c == d.subcomponent) return 'T';
    if (c == d.repetition) return 'R';
    if (c == d.escape) return 'E';
    return 0;
}

std::string encode_field(const field& f, const delimiters& d) {
    std::string out;
    for (size_t r = 0; r < f.reps.size(); ++r) {
        if (r > 0) out.push_back(d.repetition);
        const auto& rep = f.reps[r];
        for (size_t c = 0; c < rep.components.size(); ++c) {
            if (c > 0) out.push_back(d.component);
            const auto& comp = rep.components[c];
            for (size_t s = 0; s < comp.subs.size(); ++s) {
                if (s > 0) out.push_back(d.subcomponent);
                out += escape_value(comp.subs[s], d);
            }
        }
    }
    return out;
}

field decode_field(const std::string& text, const delimiters& d) {
    field f;
    f.reps.clear();
    size_t rep_start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i != text.size() && text[i] != d.repetition) continue;
        std::string rep_text = text.substr(rep_start, i - rep_start);
        rep_start = i + 1;
        field_rep rep;
        rep.components.clear();
        size_t comp_start = 0;
        for (size_t j = 0; j <= rep_text.size(); ++j) {
            if (j != rep_text.size() && rep_text[j] != d.component) continue;
            std::string comp_text = rep_text.substr(comp_start, j - comp_start);
            comp_start = j + 1;
            component comp;
            comp.subs.clear();
            size_t sub_start = 0;
            for (size_t k = 0; k <= comp_text.size(); ++k) {
                if (k != comp_text.size() && comp_text[k] != d.subcomponent) continue;
                comp.subs.push_back(
                    unescape_value(comp_text.substr(sub_start, k - sub_start), d));
                sub_start = k + 1;
            }
            rep.components.push_back(std::move(comp));
        }
        f.reps.push_back(std::move(rep));
    }
    return f;
}

// Splits on unescaped field separators (separators never appear inside
// escape sequences, so a plain split is exact).
std::vector<std::string> split_fields(const std::string& body, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= body.size(); ++i) {
        if (i == body.size() || body[i] == sep) {
            out.push_back(body.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace

std::string escape_value(const std::string& value, const delimiters& d) {
    std::string out;
    out.reserve(value.size());
    for (char c : value) {
        char letter = escape_letter(c, d);
        if (letter != 0) {
            out.push_back(d.escape);
            out.push_back(letter);
            out.push_back(d.escape);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string unescape_value(const std::string& text, const delimiters& d) {
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == d.escape && i + 2 < text.size() && text[i + 2] == d.escape) {
            char letter = text[i + 1];
            char decoded = 0;
            if (letter == 'F') decoded = d.field;
            else if (letter == 'S') decoded = d.component;
            else if (letter == 'T') decoded = d.subcomponent;
            else if (letter == 'R') decoded = d.repetition;
            else if (letter == 'E') decoded = d.escape;
            if (decoded != 0) {
                out.push_back(decoded);
                i += 2;
                continue;
            }
        }
        out.push_back(text[i]);  // unknown escapes pass through verbatim
    }
    return out;
}

util::byte_buffer encode_message(const hl7_message& msg) {
    if (msg.segments.empty() || msg.segments.front().id != "MSH") {
        raise(errc::invariant_violation, "first segment must be MSH");
    }
    if (!msg.delims.distinct()) {
        raise(errc::invariant_violation, "delimiter characters must be distinct");
    }
    const delimiters& d = msg.delims;
    std::string out;
    for (size_t s = 0; s < msg.segments.size(); ++s) {
        const segment& seg = msg.segments[s];
        if (seg.id.size() != 3) {
            raise(errc::invariant_violation, "segment id must be 3 characters: '" + seg.id + "'");
        }
        if (s > 0) out.push_back(kCr);
        out += seg.id;

        bool is_msh = seg.id == "MSH";
        size_t first = 0;
        if (is_msh) {
            if (seg.fields.size() < 2) {
                raise(errc::invariant_violation, "MSH needs MSH-1 and MSH-2");
            }
            first = 2;  // MSH-1 is the separator itself; MSH-2 written raw
        }
        // Trailing empty fields are trimmed (but never MSH-2).
        size_t last = seg.fields.size();
        while (last > first && seg.fields[last - 1].empty_value()) --last;

        if (is_msh) {
            out.push_back(d.field);
            out += seg.fields[1].reps[0].components[0].subs[0];
        }
        for (size_t i = first; i < last; ++i) {
            out.push_back(d.field);
            out += encode_field(seg.fields[i], d);
        }
    }
    return util::byte_buffer(out.begin(), out.end());
}

hl7_message parse_message(std::span<const uint8_t> bytes) {
    std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (text.size() < 9 || text.compare(0, 3, "MSH") != 0) {
        raise(errc::not_hl7, "message does not start with MSH");
    }

    hl7_message msg;
    delimiters d;
    d.field = text[3];
    // MSH-2 runs to the next field separator within the first segment;
    // standard form is 4 chars.
    size_t line_end = text.find_first_of("\r\n");
    if (line_end == std::string::npos) line_end = text.size();
    size_t msh2_end = text.find(d.field, 4);
    if (msh2_end == std::string::npos || msh2_end > line_end) {
        msh2_end = std::min(line_end, static_cast<size_t>(8));
    }
    if (msh2_end <= 4 || msh2_end > 8) {
        raise(errc::bad_delimiters, "malformed MSH-2");
    }
    std::string encoding_chars = text.substr(4, msh2_end - 4);
    if (encoding_chars.size() >= 1) d.component = encoding_chars[0];
    if (encoding_chars.size() >= 2) d.repetition = encoding_chars[1];
    if (encoding_chars.size() >= 3) d.escape = encoding_chars[2];
    if (encoding_chars.size() >= 4) d.subcomponent = encoding_chars[3];
    if (!d.distinct()) raise(errc::bad_delimiters, "delimiter characters are not distinct");
    msg.delims = d;

    // Normalize segment terminators to CR and split.
    std::vector<std::string> lines;
    std::string current;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) lines.push_back(current);

    for (const auto& line : lines) {
        if (line.empty()) continue;
        if (line.size() < 3) raise(errc::not_hl7, "segment line shorter than an id");
        segment seg;
        seg.id = line.substr(0, 3);
        if (seg.id == "MSH") {
            field msh1;
            msh1.reps[0].components[0].subs[0] = std::string(1, d.field);
            seg.fields.push_back(std::move(msh1));
            field msh2;
            msh2.reps[0].components[0].subs[0] = encoding_chars;
            seg.fields.push_back(std::move(msh2));
            std::string rest = line.size() > msh2_end + 1 ? line.substr(msh2_end + 1) : "";
            if (line.size() > msh2_end) {
                for (const auto& ftext : split_fields(rest, d.field)) {
                    seg.fields.push_back(decode_field(ftext, d));
                }
            }
        } else {
            if (line.size() > 3 && line[3] != d.field) {
                raise(errc::not_hl7, "segment id not followed by field separator");
            }
            if (line.size() > 4) {
                for (const auto& ftext : split_fields(line.substr(4), d.field)) {
                    seg.fields.push_back(decode_field(ftext, d));
                }
            }
        }
        msg.segments.push_back(std::move(seg));
    }
    return msg;
}

}  // namespace flowgate::hl7
