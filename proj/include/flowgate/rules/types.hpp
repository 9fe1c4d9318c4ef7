#pragma once

#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "flowgate/dicom/dataset.hpp"
#include "flowgate/dicom/tag.hpp"
#include "flowgate/dicom/vr.hpp"
#include "flowgate/dimse/ae_title.hpp"

namespace flowgate::rules {

struct source_def {
    std::string name;
    dimse::ae_title calling_ae;
    std::string peer_address;  // optional constraint; empty = any
    // "modality" (default) or "ai" — the gateway treats objects from ai
    // sources as results rather than new studies.
    std::string source_class = "modality";

    bool operator==(const source_def&) const = default;
};

struct destination_def {
    std::string name;
    std::string host;
    uint16_t port = 0;
    dimse::ae_title called_ae;
    std::optional<dimse::ae_title> calling_ae_override;

    bool operator==(const destination_def&) const = default;
};

enum class compare_op { eq, ne, matches, lt, le, gt, ge };

const char* compare_op_token(compare_op op);

// One comparison. The attribute is either a selector keyword (modality,
// study_description, series_description, slice_thickness, sop_class,
// accession, source) or an explicit "(gggg,eeee)" tag.
struct predicate {
    std::string keyword;  // empty when is_tag
    bool is_tag = false;
    dicom::tag attr_tag;
    compare_op op = compare_op::eq;
    bool numeric_literal = false;
    double number = 0.0;
    std::string text;  // string or regex literal (raw, without quotes)

    // Compiled once at parse time; the test oracle deliberately recompiles
    // from `text` on every evaluation instead.
    std::shared_ptr<const std::regex> compiled_regex;

    bool operator==(const predicate& other) const {
        return keyword == other.keyword && is_tag == other.is_tag && attr_tag == other.attr_tag &&
               op == other.op && numeric_literal == other.numeric_literal &&
               number == other.number && text == other.text;
    }
};

// Boolean tree over predicates, plus constant true/false for catch-all rules.
struct match_expr {
    enum class node_kind { constant, pred, and_node, or_node, not_node };
    node_kind kind = node_kind::constant;
    bool constant_value = true;
    predicate pred;
    std::vector<match_expr> children;

    bool operator==(const match_expr&) const = default;
};

enum class priority_level { low, medium, high };
const char* priority_name(priority_level p);
std::optional<priority_level> priority_from_name(std::string_view s);

enum class route_mode { parallel, serial };

struct morph_op {
    enum class op_kind { set, remove, copy };
    op_kind kind = op_kind::set;
    dicom::tag target;
    dicom::vr set_vr = dicom::vr::LO;  // set only
    std::string value;                 // set only
    dicom::tag copy_from;              // copy only

    bool operator==(const morph_op&) const = default;
};

struct action {
    enum class action_kind { route, block, morph, priority };
    action_kind kind = action_kind::block;
    std::vector<std::string> destinations;        // route
    route_mode mode = route_mode::parallel;       // route
    std::vector<morph_op> morphs;                 // morph
    priority_level priority = priority_level::low;  // priority

    bool operator==(const action&) const = default;
};

struct rule {
    std::string name;
    match_expr when;
    std::vector<action> actions;
    bool continue_after_match = false;

    bool operator==(const rule&) const = default;
};

struct rule_set {
    uint64_t version = 0;
    std::vector<source_def> sources;
    std::vector<destination_def> destinations;
    std::vector<rule> rules;

    const destination_def* find_destination(std::string_view name) const;
    const source_def* find_source_by_ae(const dimse::ae_title& calling) const;

    bool operator==(const rule_set&) const = default;
};

// Per-instance routing outcome.
struct decision {
    uint64_t ruleset_version = 0;
    std::vector<std::string> matched_rules;
    std::vector<std::string> destinations;  // deduplicated, first-mention order
    route_mode mode = route_mode::parallel;
    std::vector<morph_op> morphs;
    std::optional<priority_level> priority;
    bool blocked = false;
    std::string reason;  // "no-match", "block:<rule>", empty otherwise

    bool operator==(const decision&) const = default;
};

// Attribute lookup used by the evaluator. Lookups return nullopt for absent
// attributes; every comparison against an absent value is false.
class attribute_view {
public:
    virtual ~attribute_view() = default;
    virtual std::optional<std::string> keyword(std::string_view name) const = 0;
    virtual std::optional<std::string> tag_value(dicom::tag t) const = 0;
};

// Attribute view over a DICOM dataset using the standard keyword mapping.
class dataset_attributes final : public attribute_view {
public:
    explicit dataset_attributes(const dicom::data_set& ds) : ds_(&ds) {}

    std::optional<std::string> keyword(std::string_view name) const override;
    std::optional<std::string> tag_value(dicom::tag t) const override;

private:
    const dicom::data_set* ds_;
};

// Attribute view over explicit key/value pairs (series-level selection,
// randomized tests).
class map_attributes final : public attribute_view {
public:
    void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
    void set_tag(dicom::tag t, std::string value) { tag_values_[t] = std::move(value); }

    std::optional<std::string> keyword(std::string_view name) const override;
    std::optional<std::string> tag_value(dicom::tag t) const override;

private:
    std::map<std::string, std::string, std::less<>> values_;
    std::map<dicom::tag, std::string> tag_values_;
};

}  // namespace flowgate::rules
