#pragma once

// Reference rules evaluator: a deliberately naive re-implementation used
// only in tests. Every predicate is interpreted from scratch on every call
// (regexes recompiled from source, no short-circuiting, no caching); its
// decisions must match flowgate::rules::evaluate_instance exactly.

#include <regex>

#include "flowgate/rules/types.hpp"
#include "flowgate/util/strings.hpp"

namespace testsup {

using namespace flowgate::rules;

inline bool oracle_eval_predicate(const predicate& p, const attribute_view& attrs,
                                  const source_def& source) {
    std::optional<std::string> value;
    if (p.is_tag) {
        value = attrs.tag_value(p.attr_tag);
    } else if (p.keyword == "source") {
        value = source.name;
    } else {
        value = attrs.keyword(p.keyword);
    }
    if (!value.has_value()) return false;  // absent attribute: every comparison is false

    if (p.op == compare_op::matches) {
        std::string pattern = p.text;
        auto flags = std::regex::ECMAScript;
        if (pattern.rfind("(?i)", 0) == 0) {
            pattern.erase(0, 4);
            flags |= std::regex::icase;
        }
        std::regex fresh(pattern, flags);  // recompiled on every evaluation
        return std::regex_search(*value, fresh);
    }

    if (p.numeric_literal) {
        auto v = flowgate::util::parse_decimal(*value);
        if (!v.has_value()) return false;
        double lhs = *v;
        double rhs = p.number;
        if (p.op == compare_op::eq) return lhs == rhs;
        if (p.op == compare_op::ne) return lhs != rhs;
        if (p.op == compare_op::lt) return lhs < rhs;
        if (p.op == compare_op::le) return lhs <= rhs;
        if (p.op == compare_op::gt) return lhs > rhs;
        if (p.op == compare_op::ge) return lhs >= rhs;
        return false;
    }
    if (p.op == compare_op::eq) return *value == p.text;
    if (p.op == compare_op::ne) return *value != p.text;
    return false;
}

// No short-circuiting: every child is evaluated before combining.
inline bool oracle_eval_expr(const match_expr& e, const attribute_view& attrs,
                             const source_def& source) {
    if (e.kind == match_expr::node_kind::constant) return e.constant_value;
    if (e.kind == match_expr::node_kind::pred) return oracle_eval_predicate(e.pred, attrs, source);
    if (e.kind == match_expr::node_kind::not_node) {
        return !oracle_eval_expr(e.children.front(), attrs, source);
    }
    std::vector<bool> results;
    for (const auto& c : e.children) results.push_back(oracle_eval_expr(c, attrs, source));
    if (e.kind == match_expr::node_kind::and_node) {
        bool all = true;
        for (bool r : results) all = all && r;
        return all;
    }
    bool any = false;
    for (bool r : results) any = any || r;
    return any;
}

inline decision oracle_evaluate(const rule_set& rs, const attribute_view& attrs,
                                const source_def& source) {
    decision d;
    d.ruleset_version = rs.version;

    bool stopped = false;
    for (const auto& r : rs.rules) {
        if (stopped) break;
        if (!oracle_eval_expr(r.when, attrs, source)) continue;
        d.matched_rules.push_back(r.name);

        bool blocked_here = false;
        for (const auto& a : r.actions) {
            if (a.kind == action::action_kind::block) {
                d.blocked = true;
                d.destinations.clear();
                d.reason = "block:" + r.name;
                blocked_here = true;
                break;
            }
            if (a.kind == action::action_kind::route) {
                for (const auto& name : a.destinations) {
                    bool seen = false;
                    for (const auto& existing : d.destinations) {
                        if (existing == name) seen = true;
                    }
                    if (!seen) d.destinations.push_back(name);
                }
                d.mode = a.mode;
            }
            if (a.kind == action::action_kind::morph) {
                for (const auto& m : a.morphs) d.morphs.push_back(m);
            }
            if (a.kind == action::action_kind::priority) d.priority = a.priority;
        }
        if (blocked_here) return d;
        if (!r.continue_after_match) stopped = true;
    }

    if (d.matched_rules.empty()) {
        d.blocked = true;
        d.reason = "no-match";
    }
    return d;
}

}  // namespace testsup
