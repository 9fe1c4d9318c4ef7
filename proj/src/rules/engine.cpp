#include "flowgate/rules/engine.hpp"

#include <algorithm>

#include "flowgate/util/strings.hpp"

namespace flowgate::rules {

namespace {

bool eval_predicate(const predicate& p, const attribute_view& attrs, const source_def& source) {
    std::optional<std::string> value;
    if (p.is_tag) {
        value = attrs.tag_value(p.attr_tag);
    } else if (p.keyword == "source") {
        value = source.name;
    } else {
        value = attrs.keyword(p.keyword);
    }
    if (!value) return false;

    if (p.op == compare_op::matches) {
        return std::regex_search(*value, *p.compiled_regex);
    }
    if (p.numeric_literal) {
        auto v = util::parse_decimal(*value);
        if (!v) return false;
        switch (p.op) {
            case compare_op::eq: return *v == p.number;
            case compare_op::ne: return *v != p.number;
            case compare_op::lt: return *v < p.number;
            case compare_op::le: return *v <= p.number;
            case compare_op::gt: return *v > p.number;
            case compare_op::ge: return *v >= p.number;
            default: return false;
        }
    }
    switch (p.op) {
        case compare_op::eq: return *value == p.text;
        case compare_op::ne: return *value != p.text;
        default: return false;  // numeric ops never carry string literals (parser enforces)
    }
}

}  // namespace

bool evaluate_expr(const match_expr& expr, const attribute_view& attrs,
                   const source_def& source) {
    switch (expr.kind) {
        case match_expr::node_kind::constant:
            return expr.constant_value;
        case match_expr::node_kind::pred:
            return eval_predicate(expr.pred, attrs, source);
        case match_expr::node_kind::and_node:
            return std::all_of(expr.children.begin(), expr.children.end(),
                               [&](const match_expr& c) { return evaluate_expr(c, attrs, source); });
        case match_expr::node_kind::or_node:
            return std::any_of(expr.children.begin(), expr.children.end(),
                               [&](const match_expr& c) { return evaluate_expr(c, attrs, source); });
        case match_expr::node_kind::not_node:
            return !evaluate_expr(expr.children.front(), attrs, source);
    }
    return false;
}

decision evaluate_instance(const rule_set& rs, const attribute_view& attrs,
                           const source_def& source) {
    decision d;
    d.ruleset_version = rs.version;

    for (const auto& r : rs.rules) {
        if (!evaluate_expr(r.when, attrs, source)) continue;
        d.matched_rules.push_back(r.name);

        for (const auto& a : r.actions) {
            switch (a.kind) {
                case action::action_kind::block:
                    d.blocked = true;
                    d.destinations.clear();
                    d.reason = "block:" + r.name;
                    return d;
                case action::action_kind::route:
                    for (const auto& name : a.destinations) {
                        if (std::find(d.destinations.begin(), d.destinations.end(), name) ==
                            d.destinations.end()) {
                            d.destinations.push_back(name);
                        }
                    }
                    d.mode = a.mode;
                    break;
                case action::action_kind::morph:
                    d.morphs.insert(d.morphs.end(), a.morphs.begin(), a.morphs.end());
                    break;
                case action::action_kind::priority:
                    d.priority = a.priority;
                    break;
            }
        }
        if (!r.continue_after_match) break;
    }

    if (d.matched_rules.empty()) {
        d.blocked = true;
        d.reason = "no-match";
    }
    return d;
}

dicom::data_set apply_morphs(const dicom::data_set& ds, const std::vector<morph_op>& morphs,
                             std::vector<std::string>* warnings) {
    dicom::data_set out = ds;
    for (const auto& op : morphs) {
        switch (op.kind) {
            case morph_op::op_kind::set:
                out.set_string(op.target, op.set_vr, op.value);
                break;
            case morph_op::op_kind::remove:
                out.remove(op.target);
                break;
            case morph_op::op_kind::copy: {
                const auto* src = out.find(op.copy_from);
                if (src == nullptr) {
                    if (warnings != nullptr) {
                        warnings->push_back("copy source " + op.copy_from.to_string() +
                                            " absent; op skipped");
                    }
                    break;
                }
                if (src->element_vr() == dicom::vr::SQ) {
                    out.set(dicom::data_element::sequence(op.target, src->items()));
                } else {
                    out.set_bytes(op.target, src->element_vr(), src->value());
                }
                break;
            }
        }
    }
    return out;
}

}  // namespace flowgate::rules
