#pragma once

#include <string>
#include <vector>

#include "flowgate/rules/types.hpp"

namespace flowgate::rules {

// Tests rules top to bottom. On a match, actions accumulate into the
// decision; evaluation stops unless the rule sets continue. A block action
// short-circuits everything and clears destinations. No match at all yields
// the default-deny decision (blocked, reason "no-match").
//
// Missing-value rule: every comparison — including != — against an absent
// attribute is false; `not` then applies to that boolean.
decision evaluate_instance(const rule_set& rs, const attribute_view& attrs,
                           const source_def& source);

// Single-expression evaluation (series selection reuses the predicate
// machinery without a full rule set).
bool evaluate_expr(const match_expr& expr, const attribute_view& attrs,
                   const source_def& source);

// Applies morph ops in order. A copy whose source tag is absent is skipped
// with a warning. Elements not named by any op are untouched.
dicom::data_set apply_morphs(const dicom::data_set& ds, const std::vector<morph_op>& morphs,
                             std::vector<std::string>* warnings = nullptr);

}  // namespace flowgate::rules
