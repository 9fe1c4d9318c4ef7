#pragma once

#include <string_view>
#include <vector>

#include "flowgate/rules/types.hpp"
#include "flowgate/util/sections.hpp"

namespace flowgate::rules {

// Parses the routing config grammar ([source]/[destination]/[rule] sections).
// Throws errc::syntax_error (with line/column), errc::unresolved_reference,
// errc::duplicate_name.
rule_set parse_rules(std::string_view text, uint64_t version = 0);

// Same, over pre-scanned sections (the gateway strips its own [gateway]
// section first and hands the rest here).
rule_set parse_rules_sections(const std::vector<util::section>& sections, uint64_t version = 0);

// Boolean-expression parser, reused by the DAG series selector's criteria.
match_expr parse_match_expr(std::string_view text, int line = 0);

// Canonical text form; parse(format(rs)) yields an identical rule_set.
std::string format_rules(const rule_set& rs);

}  // namespace flowgate::rules
