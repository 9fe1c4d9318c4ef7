#pragma once

#include <string>
#include <vector>

namespace flowgate::util {

// Line-oriented section grammar shared by rules configs, graph files, and
// scenario configs:
//
//   # comment
//   [kind name]        (name optional)
//   key = value        (repeated keys allowed, order preserved)
struct section_entry {
    std::string key;
    std::string value;
    int line = 0;
};

struct section {
    std::string kind;
    std::string name;  // empty when header had no name
    int line = 0;
    std::vector<section_entry> entries;

    const std::string* find(std::string_view key) const {
        for (const auto& e : entries) {
            if (e.key == key) return &e.value;
        }
        return nullptr;
    }
};

// Throws flowgate::error(errc::syntax_error) with line/column on malformed
// lines (text outside a section, missing '=', unterminated header).
std::vector<section> scan_sections(std::string_view text);

}  // namespace flowgate::util
