#include "flowgate/util/sections.hpp"

#include "flowgate/error.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::util {

namespace {

[[noreturn]] void fail(int line, int column, const std::string& message) {
    raise(errc::syntax_error,
          "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message);
}

}  // namespace

std::vector<section> scan_sections(std::string_view text) {
    std::vector<section> out;
    int line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // '#' starts a comment unless it sits inside a quoted string.
        bool in_quotes = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quotes = !in_quotes;
            if (line[i] == '#' && !in_quotes) {
                line.resize(i);
                break;
            }
        }
        std::string stripped = trim(line);
        if (stripped.empty()) continue;

        if (stripped.front() == '[') {
            if (stripped.back() != ']') fail(line_no, static_cast<int>(stripped.size()), "unterminated section header");
            std::string inner = trim(stripped.substr(1, stripped.size() - 2));
            if (inner.empty()) fail(line_no, 2, "empty section header");
            auto space = inner.find_first_of(" \t");
            section s;
            s.line = line_no;
            if (space == std::string::npos) {
                s.kind = inner;
            } else {
                s.kind = inner.substr(0, space);
                s.name = trim(inner.substr(space + 1));
            }
            out.push_back(std::move(s));
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, 1, "expected 'key = value'");
        if (out.empty()) fail(line_no, 1, "entry outside any [section]");
        section_entry e;
        e.key = trim(line.substr(0, eq));
        e.value = trim(line.substr(eq + 1));
        e.line = line_no;
        if (e.key.empty()) fail(line_no, 1, "empty key");
        out.back().entries.push_back(std::move(e));
    }
    return out;
}

}  // namespace flowgate::util
