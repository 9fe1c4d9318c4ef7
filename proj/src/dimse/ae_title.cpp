#include "flowgate/dimse/ae_title.hpp"

#include <cctype>

#include "flowgate/error.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::dimse {

namespace {

bool valid_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == ' ' || c == '_' || c == '-';
}

}  // namespace

ae_title ae_title::parse(std::string_view text) {
    std::string t = util::trim(text);
    if (t.empty() || t.size() > 16) {
        raise(errc::invariant_violation, "AE title must be 1-16 characters: \"" + t + "\"");
    }
    for (char c : t) {
        if (!valid_char(c)) {
            raise(errc::invariant_violation,
                  "AE title contains invalid character: \"" + t + "\"");
        }
    }
    ae_title out;
    out.value_ = std::move(t);
    return out;
}

ae_title ae_title::from_wire(std::string_view field) {
    size_t end = field.size();
    while (end > 0 && (field[end - 1] == ' ' || field[end - 1] == '\0')) --end;
    return parse(field.substr(0, end));
}

std::string ae_title::padded() const {
    std::string out = value_;
    out.resize(16, ' ');
    return out;
}

}  // namespace flowgate::dimse
