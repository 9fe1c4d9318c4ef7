#include "flowgate/sr/mapping.hpp"

#include <set>

#include "flowgate/dicom/dict.hpp"
#include "flowgate/error.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::sr {

namespace tags = dicom::tags;

namespace {

[[noreturn]] void fail(int line, const std::string& message) {
    raise(errc::syntax_error, "line " + std::to_string(line) + ": " + message);
}

std::string render_node_value(const sr_node& node) {
    switch (node.type) {
        case value_type::code_item:
            return node.code_value.value;
        case value_type::num:
            return util::format_decimal(node.numeric_value);
        case value_type::text:
            return node.text_value;
        case value_type::scoord: {
            std::string out;
            for (const auto& p : node.points) {
                if (!out.empty()) out.push_back(',');
                out += util::format_decimal(p.x) + "," + util::format_decimal(p.y);
            }
            return out;
        }
        default:
            return "";
    }
}

}  // namespace

mapping_template parse_mapping_template(std::string_view text) {
    mapping_template tpl;
    std::set<std::string> seen;
    int line_no = 0;
    for (const auto& raw : util::split(text, '\n')) {
        ++line_no;
        std::string line = util::trim(raw);
        if (!line.empty() && line.back() == '\r') line = util::trim(line.substr(0, line.size() - 1));
        if (line.empty() || line[0] == '#') continue;

        if (!util::starts_with(line, "map ")) fail(line_no, "expected 'map <FIELD_ID> ...'");
        std::string rest = util::trim(line.substr(4));

        auto space = rest.find(' ');
        if (space == std::string::npos) fail(line_no, "missing concept clause");
        mapping_entry entry;
        entry.field_id = rest.substr(0, space);
        rest = util::trim(rest.substr(space));

        if (!util::starts_with(rest, "concept ")) fail(line_no, "expected 'concept <scheme>:<value>'");
        rest = util::trim(rest.substr(8));
        auto concept_end = rest.find_first_of(" {");
        std::string concept_text =
            concept_end == std::string::npos ? rest : rest.substr(0, concept_end);
        auto colon = concept_text.find(':');
        if (colon == std::string::npos) fail(line_no, "concept needs <scheme>:<value>");
        entry.concept_name.scheme = concept_text.substr(0, colon);
        entry.concept_name.value = concept_text.substr(colon + 1);
        if (entry.concept_name.scheme.empty() || entry.concept_name.value.empty()) {
            fail(line_no, "concept scheme and value must be non-empty");
        }
        rest = concept_end == std::string::npos ? "" : util::trim(rest.substr(concept_end));

        if (util::starts_with(rest, "{")) {
            auto close = rest.find('}');
            if (close == std::string::npos) fail(line_no, "unterminated value map");
            std::string body = rest.substr(1, close - 1);
            rest = util::trim(rest.substr(close + 1));
            for (auto& pair_text : util::split(body, ',')) {
                auto trimmed = util::trim(pair_text);
                if (trimmed.empty()) continue;
                auto eq = trimmed.find('=');
                if (eq == std::string::npos) fail(line_no, "value map entries are <code>=<out>");
                entry.value_map.emplace_back(util::trim(trimmed.substr(0, eq)),
                                             util::trim(trimmed.substr(eq + 1)));
            }
        }
        if (util::starts_with(rest, "default")) {
            entry.default_value = util::trim(rest.substr(7));
            rest.clear();
        }
        if (!rest.empty()) fail(line_no, "trailing input '" + rest + "'");

        if (!seen.insert(entry.field_id).second) {
            raise(errc::duplicate_target, "field '" + entry.field_id + "'");
        }
        tpl.entries.push_back(std::move(entry));
    }
    return tpl;
}

extraction_result extract_fields(const sr_node& tree, const mapping_template& tpl,
                                 const dicom::data_set& sr_dataset) {
    extraction_result out;

    for (const auto& entry : tpl.entries) {
        const sr_node* node = tree.find_concept(entry.concept_name);
        if (node == nullptr) {
            if (entry.default_value) {
                out.fields.emplace_back(entry.field_id, *entry.default_value);
            } else {
                out.warnings.push_back("concept " + entry.concept_name.scheme + ":" +
                                       entry.concept_name.value + " absent; field " +
                                       entry.field_id + " omitted");
            }
            continue;
        }
        std::string value = render_node_value(*node);
        if (node->type == value_type::code_item && !entry.value_map.empty()) {
            bool mapped = false;
            for (const auto& [code_value, output] : entry.value_map) {
                if (code_value == node->code_value.value) {
                    value = output;
                    mapped = true;
                    break;
                }
            }
            if (!mapped) {
                out.warnings.push_back("code '" + node->code_value.value + "' not in value map of " +
                                       entry.field_id + "; raw value passed through");
            }
        }
        out.fields.emplace_back(entry.field_id, value);
    }

    auto& ctx = out.context;
    ctx.accession = sr_dataset.get_string_or(tags::accession_number, "");
    ctx.study_uid = sr_dataset.get_string_or(tags::study_instance_uid, "");
    ctx.patient_id = sr_dataset.get_string_or(tags::patient_id, "");
    auto name = sr_dataset.get_string_or(tags::patient_name, "");
    auto caret = name.find('^');
    ctx.patient_family = caret == std::string::npos ? name : name.substr(0, caret);
    ctx.patient_given = caret == std::string::npos ? "" : name.substr(caret + 1);
    ctx.patient_birth_date = sr_dataset.get_string_or(tags::patient_birth_date, "");
    ctx.study_date = sr_dataset.get_string_or(tags::study_date, "");
    ctx.study_code = sr_dataset.get_string_or(tags::study_id, "");
    ctx.study_description = sr_dataset.get_string_or(tags::study_description, "");
    ctx.study_short_description = sr_dataset.get_string_or(tags::series_description, "");
    ctx.evaluation_type = sr_dataset.get_string_or(tags::manufacturer, "");
    return out;
}

}  // namespace flowgate::sr
