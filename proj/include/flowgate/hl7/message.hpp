#pragma once

#include <string>
#include <vector>

namespace flowgate::hl7 {

// The five encoding characters; MSH-1/MSH-2 always reflect them.
struct delimiters {
    char field = '|';
    char component = '^';
    char repetition = '~';
    char escape = '\\';
    char subcomponent = '&';

    bool operator==(const delimiters&) const = default;
    bool distinct() const {
        char c[5] = {field, component, repetition, escape, subcomponent};
        for (int i = 0; i < 5; ++i) {
            for (int j = i + 1; j < 5; ++j) {
                if (c[i] == c[j]) return false;
            }
        }
        return true;
    }
};

// Decoded value tree: field -> repetitions -> components -> subcomponents.
// Leaf strings hold unescaped content.
struct component {
    std::vector<std::string> subs {""};
    bool operator==(const component&) const = default;
};

struct field_rep {
    std::vector<component> components {component {}};
    bool operator==(const field_rep&) const = default;
};

struct field {
    std::vector<field_rep> reps {field_rep {}};
    bool operator==(const field&) const = default;

    bool empty_value() const {
        return reps.size() == 1 && reps[0].components.size() == 1 &&
               reps[0].components[0].subs.size() == 1 && reps[0].components[0].subs[0].empty();
    }
};

// fields[i] is SEG-(i+1); for MSH, fields[0] holds the field separator
// itself and fields[1] the raw encoding characters.
struct segment {
    std::string id;
    std::vector<field> fields;

    bool operator==(const segment&) const = default;

    // 1-based setters; intermediate fields pad out empty.
    void set(int number, std::string value);
    void set_components(int number, std::vector<std::string> values);

    // 1-based read of a field rendered with default delimiters ("" if absent).
    std::string text(int number) const;
};

struct hl7_message {
    delimiters delims;
    std::vector<segment> segments;

    bool operator==(const hl7_message&) const = default;

    segment& add_segment(const std::string& id);
    const segment* find(const std::string& id) const;
};

}  // namespace flowgate::hl7
