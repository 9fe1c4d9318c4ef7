#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowgate/dicom/dataset.hpp"
#include "flowgate/sr/types.hpp"

namespace flowgate::sr {

// Concept-to-field mapping template, one entry per line:
//   map <FIELD_ID> concept <scheme>:<value> { <code>=<out>, ... } [default <out>]
// The braces are optional for NUM/TEXT concepts.
struct mapping_entry {
    std::string field_id;
    code concept_name;  // scheme + value; meaning unused for matching
    std::vector<std::pair<std::string, std::string>> value_map;
    std::optional<std::string> default_value;

    bool operator==(const mapping_entry&) const = default;
};

struct mapping_template {
    std::vector<mapping_entry> entries;

    bool operator==(const mapping_template&) const = default;
};

// Throws errc::syntax_error / errc::duplicate_target.
mapping_template parse_mapping_template(std::string_view text);

// Patient/study context pulled from the SR dataset alongside the fields.
struct sr_context {
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
    std::string evaluation_type;
};

struct extraction_result {
    std::vector<std::pair<std::string, std::string>> fields;  // template order
    sr_context context;
    std::vector<std::string> warnings;
};

// For each template entry, depth-first search for the first node with the
// entry's concept. CODE payloads map through the value map (raw code value
// passes through with a warning when unmapped); NUM renders as a decimal
// string; a missing concept yields the default or omits the field with a
// warning. Total: never throws.
extraction_result extract_fields(const sr_node& tree, const mapping_template& tpl,
                                 const dicom::data_set& sr_dataset);

}  // namespace flowgate::sr
