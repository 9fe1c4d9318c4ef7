#include "flowgate/sr/sr.hpp"

#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/error.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::sr {

using dicom::data_set;
using dicom::vr;
namespace tags = dicom::tags;

namespace concepts {
code report_root() { return {"REPORT", scheme, "Imaging Measurement Report"}; }
code priority() { return {"PRIORITY", scheme, "Finding priority"}; }
code detection() { return {"DETECTION", scheme, "Detection result"}; }
code certainty() { return {"CERTAINTY", scheme, "Detection certainty"}; }
code bbox() { return {"BBOX", scheme, "Finding bounding box"}; }
code no_units() { return {"1", "UCUM", "no units"}; }
}  // namespace concepts

namespace {

const char* relationship_text(relationship_type r) {
    switch (r) {
        case relationship_type::contains: return "CONTAINS";
        case relationship_type::has_properties: return "HAS PROPERTIES";
        case relationship_type::inferred_from: return "INFERRED FROM";
    }
    return "CONTAINS";
}

relationship_type relationship_from_text(const std::string& s) {
    if (s == "HAS PROPERTIES") return relationship_type::has_properties;
    if (s == "INFERRED FROM") return relationship_type::inferred_from;
    return relationship_type::contains;
}

data_set encode_code(const code& c) {
    data_set ds;
    ds.set_string(tags::code_value, vr::SH, c.value);
    ds.set_string(tags::coding_scheme_designator, vr::SH, c.scheme);
    ds.set_string(tags::code_meaning, vr::LO, c.meaning);
    return ds;
}

code decode_code(const data_set& ds) {
    code c;
    c.value = ds.get_string_or(tags::code_value, "");
    c.scheme = ds.get_string_or(tags::coding_scheme_designator, "");
    c.meaning = ds.get_string_or(tags::code_meaning, "");
    return c;
}

void encode_node_payload(data_set& item, const sr_node& node) {
    switch (node.type) {
        case value_type::container:
            item.set_string(tags::value_type, vr::CS, "CONTAINER");
            item.set_string(tags::continuity_of_content, vr::CS, "SEPARATE");
            break;
        case value_type::code_item:
            item.set_string(tags::value_type, vr::CS, "CODE");
            item.set_sequence(tags::concept_code_seq, {encode_code(node.code_value)});
            break;
        case value_type::text:
            item.set_string(tags::value_type, vr::CS, "TEXT");
            item.set_string(tags::text_value, vr::LT, node.text_value);
            break;
        case value_type::num: {
            item.set_string(tags::value_type, vr::CS, "NUM");
            data_set measured;
            measured.set_string(tags::numeric_value, vr::DS,
                                util::format_decimal(node.numeric_value));
            measured.set_sequence(tags::measurement_units_code_seq, {encode_code(node.unit)});
            item.set_sequence(tags::measured_value_seq, {measured});
            break;
        }
        case value_type::scoord: {
            item.set_string(tags::value_type, vr::CS, "SCOORD");
            item.set_string(tags::graphic_type, vr::CS, node.graphic_type);
            std::string coords;
            for (const auto& p : node.points) {
                if (!coords.empty()) coords.push_back('\\');
                coords += util::format_decimal(p.x);
                coords.push_back('\\');
                coords += util::format_decimal(p.y);
            }
            item.set_string(tags::graphic_data, vr::DS, coords);
            break;
        }
        case value_type::opaque:
            item.set_string(tags::value_type, vr::CS, node.opaque_type);
            break;
    }
}

data_set encode_node(const sr_node& node) {
    data_set item;
    item.set_string(tags::relationship_type, vr::CS, relationship_text(node.relationship));
    item.set_sequence(tags::concept_name_code_seq, {encode_code(node.concept_name)});
    encode_node_payload(item, node);
    if (!node.children.empty()) {
        std::vector<data_set> child_items;
        for (const auto& c : node.children) child_items.push_back(encode_node(c));
        item.set_sequence(tags::content_seq, std::move(child_items));
    }
    return item;
}

sr_node decode_node(const data_set& item, bool is_root) {
    sr_node node;
    if (!is_root) {
        node.relationship =
            relationship_from_text(item.get_string_or(tags::relationship_type, "CONTAINS"));
    }
    const auto* name_seq = item.find(tags::concept_name_code_seq);
    if (name_seq != nullptr && !name_seq->items().empty()) {
        node.concept_name = decode_code(name_seq->items().front());
    }

    auto vt = item.get_string(tags::value_type);
    if (!vt) raise(errc::malformed_content_sequence, "content item lacks (0040,A040)");

    if (*vt == "CONTAINER") {
        node.type = value_type::container;
    } else if (*vt == "CODE") {
        node.type = value_type::code_item;
        const auto* seq = item.find(tags::concept_code_seq);
        if (seq == nullptr || seq->items().empty()) {
            raise(errc::malformed_content_sequence, "CODE item lacks (0040,A168)");
        }
        node.code_value = decode_code(seq->items().front());
    } else if (*vt == "TEXT") {
        node.type = value_type::text;
        node.text_value = item.get_string_or(tags::text_value, "");
    } else if (*vt == "NUM") {
        node.type = value_type::num;
        const auto* seq = item.find(tags::measured_value_seq);
        if (seq == nullptr || seq->items().empty()) {
            raise(errc::malformed_content_sequence, "NUM item lacks (0040,A300)");
        }
        const auto& measured = seq->items().front();
        auto v = measured.get_decimal(tags::numeric_value);
        if (!v) raise(errc::malformed_content_sequence, "NUM item lacks (0040,A30A)");
        node.numeric_value = *v;
        const auto* units = measured.find(tags::measurement_units_code_seq);
        if (units != nullptr && !units->items().empty()) {
            node.unit = decode_code(units->items().front());
        }
    } else if (*vt == "SCOORD") {
        node.type = value_type::scoord;
        node.graphic_type = item.get_string_or(tags::graphic_type, "");
        auto parts = item.get_strings(tags::graphic_data);
        if (parts.size() % 2 != 0) {
            raise(errc::malformed_content_sequence, "SCOORD coordinate count is odd");
        }
        for (size_t i = 0; i + 1 < parts.size(); i += 2) {
            auto x = util::parse_decimal(parts[i]);
            auto y = util::parse_decimal(parts[i + 1]);
            if (!x || !y) raise(errc::malformed_content_sequence, "bad SCOORD coordinate");
            node.points.push_back({*x, *y});
        }
    } else {
        // Unknown value type: opaque leaf, children not descended.
        node.type = value_type::opaque;
        node.opaque_type = *vt;
        return node;
    }

    const auto* children = item.find(tags::content_seq);
    if (children != nullptr) {
        for (const auto& child : children->items()) {
            node.children.push_back(decode_node(child, false));
        }
    }
    return node;
}

}  // namespace

const sr_node* sr_node::find_concept(const code& target) const {
    if (concept_name.same_concept(target)) return this;
    for (const auto& c : children) {
        if (const auto* hit = c.find_concept(target)) return hit;
    }
    return nullptr;
}

void finding_report::validate() const {
    if (certainty < 0 || certainty > 10) {
        raise(errc::invariant_violation, "certainty must be 0-10, got " + std::to_string(certainty));
    }
    if (detection == detection_result::neg && bbox.has_value()) {
        raise(errc::invariant_violation, "negative detection cannot carry a bounding box");
    }
    if (bbox && (bbox->x0 >= bbox->x1 || bbox->y0 >= bbox->y1)) {
        raise(errc::invariant_violation, "bounding box corners must satisfy x0<x1, y0<y1");
    }
}

dicom::dicom_file build_tid1500_sr(const finding_report& report, util::uid_source& uids,
                                   util::clock_source& clock) {
    report.validate();

    sr_node root;
    root.type = value_type::container;
    root.concept_name = concepts::report_root();

    sr_node priority_node;
    priority_node.type = value_type::code_item;
    priority_node.concept_name = concepts::priority();
    const char* pname = rules::priority_name(report.priority);
    priority_node.code_value = {pname, concepts::scheme, pname};
    root.children.push_back(priority_node);

    sr_node detection_node;
    detection_node.type = value_type::code_item;
    detection_node.concept_name = concepts::detection();
    const char* dname = report.detection == detection_result::pos ? "POS" : "NEG";
    detection_node.code_value = {dname, concepts::scheme, dname};
    root.children.push_back(detection_node);

    sr_node certainty_node;
    certainty_node.type = value_type::num;
    certainty_node.concept_name = concepts::certainty();
    certainty_node.numeric_value = report.certainty;
    certainty_node.unit = concepts::no_units();
    root.children.push_back(certainty_node);

    if (report.bbox) {
        // Closed box: 5 pairs, first == last.
        sr_node box;
        box.type = value_type::scoord;
        box.concept_name = concepts::bbox();
        box.graphic_type = "POLYLINE";
        double x0 = report.bbox->x0, y0 = report.bbox->y0;
        double x1 = report.bbox->x1, y1 = report.bbox->y1;
        box.points = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
        root.children.push_back(box);
    }

    std::string timestamp = clock.timestamp();
    data_set ds;
    ds.set_string(tags::sop_class_uid, vr::UI, std::string(dicom::uids::comprehensive_sr));
    ds.set_string(tags::sop_instance_uid, vr::UI, uids.next_uid());
    ds.set_string(tags::modality, vr::CS, "SR");
    ds.set_string(tags::manufacturer, vr::LO, report.evaluation_type);
    ds.set_string(tags::content_date, vr::DA, timestamp.substr(0, 8));
    ds.set_string(tags::content_time, vr::TM, timestamp.substr(8));
    ds.set_string(tags::accession_number, vr::SH, report.accession);
    ds.set_string(tags::study_date, vr::DA, report.study_date);
    ds.set_string(tags::study_description, vr::LO, report.study_description);
    ds.set_string(tags::series_description, vr::LO, report.study_short_description);
    ds.set_string(tags::patient_name, vr::PN,
                  report.patient_family + "^" + report.patient_given);
    ds.set_string(tags::patient_id, vr::LO, report.patient_id);
    ds.set_string(tags::patient_birth_date, vr::DA, report.patient_birth_date);
    ds.set_string(tags::study_instance_uid, vr::UI, report.study_uid);
    ds.set_string(tags::series_instance_uid, vr::UI, uids.next_uid());
    ds.set_string(tags::study_id, vr::SH, report.study_code);

    // Root container fields live on the dataset itself.
    data_set root_item = encode_node(root);
    root_item.remove(tags::relationship_type);
    for (const auto& e : root_item) ds.set(e);

    return dicom::dicom_file::wrap(std::move(ds), std::string(dicom::uids::explicit_vr_le));
}

sr_node parse_sr_tree(const dicom::dicom_file& file) {
    if (!dicom::uids::is_sr_sop_class(file.sop_class_uid())) {
        raise(errc::not_an_sr, "SOP class " + file.sop_class_uid());
    }
    return decode_node(file.dataset, /*is_root=*/true);
}

}  // namespace flowgate::sr
