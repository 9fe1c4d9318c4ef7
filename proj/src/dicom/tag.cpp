#include "flowgate/dicom/tag.hpp"

#include <cctype>
#include <cstdlib>

namespace flowgate::dicom {

bool parse_tag(std::string_view text, tag& out) {
    // (gggg,eeee)
    if (text.size() != 11 || text.front() != '(' || text.back() != ')' || text[5] != ',') {
        return false;
    }
    auto hex4 = [](std::string_view s, uint16_t& v) {
        v = 0;
        for (char c : s) {
            if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
            v = static_cast<uint16_t>(v * 16 +
                                      (std::isdigit(static_cast<unsigned char>(c))
                                           ? c - '0'
                                           : std::toupper(static_cast<unsigned char>(c)) - 'A' + 10));
        }
        return true;
    };
    uint16_t g = 0, e = 0;
    if (!hex4(text.substr(1, 4), g) || !hex4(text.substr(6, 4), e)) return false;
    out = tag(g, e);
    return true;
}

}  // namespace flowgate::dicom
