#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowgate/rules/types.hpp"

namespace flowgate::sr {

struct code {
    std::string value;
    std::string scheme;
    std::string meaning;

    bool operator==(const code&) const = default;
    bool same_concept(const code& other) const {
        return value == other.value && scheme == other.scheme;
    }
};

// Private coding scheme for the gateway's own SR content.
namespace concepts {
inline constexpr const char* scheme = "99FLOWGATE";
code report_root();
code priority();
code detection();
code certainty();
code bbox();
code no_units();
}  // namespace concepts

enum class relationship_type { contains, has_properties, inferred_from };

enum class value_type { container, code_item, text, num, scoord, opaque };

struct point { double x = 0; double y = 0; bool operator==(const point&) const = default; };

// One content item. SCOORD POLYLINE payloads carry closed polygons (first
// pair == last pair, 5 pairs for a box).
struct sr_node {
    value_type type = value_type::container;
    code concept_name;
    relationship_type relationship = relationship_type::contains;

    code code_value;                  // CODE
    std::string text_value;           // TEXT
    double numeric_value = 0;         // NUM
    code unit;                        // NUM
    std::string graphic_type;         // SCOORD
    std::vector<point> points;        // SCOORD
    std::string opaque_type;          // unrecognized value type, kept verbatim

    std::vector<sr_node> children;

    bool operator==(const sr_node&) const = default;

    // Depth-first, document order; first node whose concept matches.
    const sr_node* find_concept(const code& target) const;
};

enum class detection_result { neg, pos };

struct pixel_box {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool operator==(const pixel_box&) const = default;
};

// The AI finding plus the patient/study context it travels with.
struct finding_report {
    rules::priority_level priority = rules::priority_level::low;
    detection_result detection = detection_result::neg;
    int certainty = 0;  // 0-10
    std::optional<pixel_box> bbox;  // x0<x1, y0<y1 when present
    std::string evaluation_type = "MONAI";
    std::string accession;
    std::string study_uid;
    std::string patient_id;
    std::string patient_family;
    std::string patient_given;
    std::string patient_birth_date;
    std::string study_date;
    std::string study_code;
    std::string study_description;
    std::string study_short_description;

    bool operator==(const finding_report&) const = default;

    // Throws errc::invariant_violation when violated.
    void validate() const;
};

}  // namespace flowgate::sr
