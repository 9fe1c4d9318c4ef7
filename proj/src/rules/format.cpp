#include <sstream>

#include "flowgate/rules/parser.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::rules {

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_predicate(const predicate& p) {
    std::string attr = p.is_tag ? p.attr_tag.to_string() : p.keyword;
    std::string lit = p.numeric_literal ? util::format_decimal(p.number) : quote(p.text);
    return attr + " " + compare_op_token(p.op) + " " + lit;
}

// Precedence: or < and < not < primary.
int precedence(const match_expr& e) {
    switch (e.kind) {
        case match_expr::node_kind::or_node: return 1;
        case match_expr::node_kind::and_node: return 2;
        case match_expr::node_kind::not_node: return 3;
        default: return 4;
    }
}

std::string format_expr(const match_expr& e, int parent_precedence) {
    std::string out;
    switch (e.kind) {
        case match_expr::node_kind::constant:
            out = e.constant_value ? "true" : "false";
            break;
        case match_expr::node_kind::pred:
            out = format_predicate(e.pred);
            break;
        case match_expr::node_kind::and_node:
        case match_expr::node_kind::or_node: {
            const char* joiner = e.kind == match_expr::node_kind::and_node ? " and " : " or ";
            int self = precedence(e);
            for (size_t i = 0; i < e.children.size(); ++i) {
                if (i > 0) out += joiner;
                // Parsing is left-associative, so right-hand children of the
                // same precedence need parentheses to reparse to this shape.
                out += format_expr(e.children[i], i == 0 ? self : self + 1);
            }
            break;
        }
        case match_expr::node_kind::not_node:
            out = "not " + format_expr(e.children.front(), precedence(e));
            break;
    }
    if (precedence(e) < parent_precedence) return "(" + out + ")";
    return out;
}

std::string format_morph(const morph_op& m) {
    switch (m.kind) {
        case morph_op::op_kind::set:
            return "set " + m.target.to_string() + " " + dicom::vr_code(m.set_vr) + " " +
                   quote(m.value);
        case morph_op::op_kind::remove:
            return "delete " + m.target.to_string();
        case morph_op::op_kind::copy:
            return "copy " + m.copy_from.to_string() + " -> " + m.target.to_string();
    }
    return "";
}

}  // namespace

std::string format_rules(const rule_set& rs) {
    std::ostringstream out;
    for (const auto& s : rs.sources) {
        out << "[source " << s.name << "]\n";
        out << "calling_ae = " << s.calling_ae.value() << "\n";
        if (!s.peer_address.empty()) out << "peer_address = " << s.peer_address << "\n";
        if (s.source_class != "modality") out << "class = " << s.source_class << "\n";
        out << "\n";
    }
    for (const auto& d : rs.destinations) {
        out << "[destination " << d.name << "]\n";
        out << "host = " << d.host << "\n";
        out << "port = " << d.port << "\n";
        out << "called_ae = " << d.called_ae.value() << "\n";
        if (d.calling_ae_override) out << "calling_ae = " << d.calling_ae_override->value() << "\n";
        out << "\n";
    }
    for (const auto& r : rs.rules) {
        out << "[rule " << r.name << "]\n";
        out << "when = " << format_expr(r.when, 0) << "\n";
        for (const auto& a : r.actions) {
            switch (a.kind) {
                case action::action_kind::route: {
                    out << "route = ";
                    for (size_t i = 0; i < a.destinations.size(); ++i) {
                        if (i > 0) out << ", ";
                        out << a.destinations[i];
                    }
                    out << " : " << (a.mode == route_mode::parallel ? "parallel" : "serial")
                        << "\n";
                    break;
                }
                case action::action_kind::block:
                    out << "block = true\n";
                    break;
                case action::action_kind::morph:
                    for (const auto& m : a.morphs) out << "morph = " << format_morph(m) << "\n";
                    break;
                case action::action_kind::priority:
                    out << "priority = " << priority_name(a.priority) << "\n";
                    break;
            }
        }
        if (r.continue_after_match) out << "continue = true\n";
        out << "\n";
    }
    return out.str();
}

}  // namespace flowgate::rules
