#include "flowgate/rules/types.hpp"

#include "flowgate/dicom/dict.hpp"

namespace flowgate::rules {

const char* compare_op_token(compare_op op) {
    switch (op) {
        case compare_op::eq: return "==";
        case compare_op::ne: return "!=";
        case compare_op::matches: return "~";
        case compare_op::lt: return "<";
        case compare_op::le: return "<=";
        case compare_op::gt: return ">";
        case compare_op::ge: return ">=";
    }
    return "==";
}

const char* priority_name(priority_level p) {
    switch (p) {
        case priority_level::high: return "HIGH";
        case priority_level::medium: return "MEDIUM";
        case priority_level::low: return "LOW";
    }
    return "LOW";
}

std::optional<priority_level> priority_from_name(std::string_view s) {
    if (s == "HIGH") return priority_level::high;
    if (s == "MEDIUM") return priority_level::medium;
    if (s == "LOW") return priority_level::low;
    return std::nullopt;
}

const destination_def* rule_set::find_destination(std::string_view name) const {
    for (const auto& d : destinations) {
        if (d.name == name) return &d;
    }
    return nullptr;
}

const source_def* rule_set::find_source_by_ae(const dimse::ae_title& calling) const {
    for (const auto& s : sources) {
        if (s.calling_ae == calling) return &s;
    }
    return nullptr;
}

std::optional<std::string> dataset_attributes::keyword(std::string_view name) const {
    using namespace dicom::tags;
    dicom::tag t;
    if (name == "modality") t = modality;
    else if (name == "study_description") t = study_description;
    else if (name == "series_description") t = series_description;
    else if (name == "slice_thickness") t = slice_thickness;
    else if (name == "sop_class") t = sop_class_uid;
    else if (name == "accession") t = accession_number;
    else return std::nullopt;
    return ds_->get_string(t);
}

std::optional<std::string> dataset_attributes::tag_value(dicom::tag t) const {
    return ds_->get_string(t);
}

std::optional<std::string> map_attributes::keyword(std::string_view name) const {
    auto it = values_.find(name);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> map_attributes::tag_value(dicom::tag t) const {
    auto it = tag_values_.find(t);
    if (it == tag_values_.end()) return std::nullopt;
    return it->second;
}

}  // namespace flowgate::rules
