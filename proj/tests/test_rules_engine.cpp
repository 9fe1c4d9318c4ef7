#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include "flowgate/dicom/codec.hpp"
#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/rules/engine.hpp"
#include "flowgate/rules/holder.hpp"
#include "flowgate/rules/parser.hpp"
#include "support/random_data.hpp"
#include "support/random_rules.hpp"
#include "support/rules_oracle.hpp"

using namespace flowgate;
using namespace flowgate::rules;

namespace {

const char* kBaseConfig = R"(
[destination pacs]
host = 127.0.0.1
port = 11112
called_ae = PACS

[destination ai_receiver]
host = 127.0.0.1
port = 11113
called_ae = AI

[rule ct_to_both]
when = modality == "CT"
route = pacs, ai_receiver : parallel
)";

source_def src(const std::string& name) {
    source_def s;
    s.name = name;
    s.calling_ae = dimse::ae_title::parse("SRC");
    return s;
}

}  // namespace

TEST_CASE("minimal config parses to one rule") {
    const char* minimal = R"(
[destination pacs]
host = 127.0.0.1
port = 104
called_ae = PACS

[rule all]
when = true
route = pacs
)";
    auto rs = parse_rules(minimal, 1);
    CHECK(rs.rules.size() == 1);
    CHECK(rs.destinations.size() == 1);
    CHECK(rs.version == 1);

    map_attributes attrs;
    auto d = evaluate_instance(rs, attrs, src("m1"));
    CHECK_FALSE(d.blocked);
    CHECK(d.destinations == std::vector<std::string> {"pacs"});
    CHECK(d.mode == route_mode::parallel);  // default when unstated
}

TEST_CASE("route to undeclared destination is an unresolved reference") {
    const char* bad = R"(
[destination pacs]
host = 127.0.0.1
port = 104
called_ae = PACS

[rule all]
when = true
route = pacs2
)";
    try {
        parse_rules(bad);
        FAIL("expected UnresolvedReference");
    } catch (const error& e) {
        CHECK(e.kind() == errc::unresolved_reference);
    }
}

TEST_CASE("grammar rejections") {
    // regex on numeric attribute
    try {
        parse_match_expr("slice_thickness ~ \"x\"");
        FAIL("expected SyntaxError");
    } catch (const error& e) {
        CHECK(e.kind() == errc::syntax_error);
    }
    // numeric comparison with string literal
    CHECK_THROWS_AS(parse_match_expr("modality < \"CT\""), error);
    // unknown attribute
    CHECK_THROWS_AS(parse_match_expr("bogus == \"x\""), error);
    // duplicate rule names
    const char* dup = "[rule a]\nwhen = true\n\n[rule a]\nwhen = true\n";
    try {
        parse_rules(dup);
        FAIL("expected DuplicateName");
    } catch (const error& e) {
        CHECK(e.kind() == errc::duplicate_name);
    }
    // syntax errors carry line/column
    try {
        parse_rules("[rule a]\nwhen = modality ==\n");
        FAIL("expected SyntaxError");
    } catch (const error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("CT instance routes to both destinations in parallel") {
    auto rs = parse_rules(kBaseConfig, 1);
    map_attributes attrs;
    attrs.set("modality", "CT");
    auto d = evaluate_instance(rs, attrs, src("modality1"));
    CHECK_FALSE(d.blocked);
    CHECK(d.destinations == std::vector<std::string> {"pacs", "ai_receiver"});
    CHECK(d.mode == route_mode::parallel);
    CHECK(d.matched_rules == std::vector<std::string> {"ct_to_both"});
}

TEST_CASE("block from modality2 short-circuits later rules") {
    const char* cfg = R"(
[destination pacs]
host = 127.0.0.1
port = 104
called_ae = PACS

[rule no_modality2]
when = source == "modality2"
block = true

[rule route_all]
when = true
route = pacs
)";
    auto rs = parse_rules(cfg, 1);
    map_attributes attrs;
    attrs.set("modality", "CT");

    auto blocked = evaluate_instance(rs, attrs, src("modality2"));
    CHECK(blocked.blocked);
    CHECK(blocked.destinations.empty());
    CHECK(blocked.matched_rules == std::vector<std::string> {"no_modality2"});
    CHECK(blocked.reason == "block:no_modality2");

    auto passed = evaluate_instance(rs, attrs, src("modality1"));
    CHECK_FALSE(passed.blocked);
    CHECK(passed.destinations == std::vector<std::string> {"pacs"});
}

TEST_CASE("thin-slice suppression: no matching rule means default-deny") {
    const char* cfg = R"(
[destination ai]
host = 127.0.0.1
port = 104
called_ae = AI

[rule thick_only]
when = slice_thickness >= 2.0
route = ai
)";
    auto rs = parse_rules(cfg, 1);

    map_attributes thin;
    thin.set("slice_thickness", "0.625");
    auto d = evaluate_instance(rs, thin, src("m1"));
    CHECK(d.blocked);
    CHECK(d.reason == "no-match");
    CHECK(d.destinations.empty());

    map_attributes thick;
    thick.set("slice_thickness", "3.0");
    auto d2 = evaluate_instance(rs, thick, src("m1"));
    CHECK_FALSE(d2.blocked);
    CHECK(d2.destinations == std::vector<std::string> {"ai"});
}

TEST_CASE("missing attribute makes every comparison false; not inverts the result") {
    map_attributes empty;
    auto s = src("m1");
    CHECK_FALSE(evaluate_expr(parse_match_expr("modality == \"CT\""), empty, s));
    CHECK_FALSE(evaluate_expr(parse_match_expr("modality != \"CT\""), empty, s));
    CHECK_FALSE(evaluate_expr(parse_match_expr("slice_thickness < 99"), empty, s));
    CHECK(evaluate_expr(parse_match_expr("not modality == \"CT\""), empty, s));
    CHECK(evaluate_expr(parse_match_expr("not modality != \"CT\""), empty, s));

    // non-numeric value fails numeric comparison the same way
    map_attributes junk;
    junk.set("slice_thickness", "thin");
    CHECK_FALSE(evaluate_expr(parse_match_expr("slice_thickness >= 0"), junk, s));
}

TEST_CASE("regex predicates: unanchored, (?i) prefix for case folding") {
    auto s = src("m1");
    map_attributes attrs;
    attrs.set("study_description", "XRAY CHEST PORTABLE");
    CHECK(evaluate_expr(parse_match_expr("study_description ~ \"CHEST\""), attrs, s));
    CHECK_FALSE(evaluate_expr(parse_match_expr("study_description ~ \"chest\""), attrs, s));
    CHECK(evaluate_expr(parse_match_expr("study_description ~ \"(?i)chest\""), attrs, s));
    CHECK(evaluate_expr(parse_match_expr("study_description ~ \"^XRAY\""), attrs, s));
}

TEST_CASE("morphs: identity, set/get, set-then-delete") {
    dicom::data_set ds;
    ds.set_string(dicom::tags::modality, dicom::vr::CS, "CT");

    CHECK(apply_morphs(ds, {}) == ds);

    morph_op set_op;
    set_op.kind = morph_op::op_kind::set;
    set_op.target = dicom::tags::institution_name;
    set_op.set_vr = dicom::vr::LO;
    set_op.value = "CAII";
    auto with_set = apply_morphs(ds, {set_op});
    CHECK(with_set.get_string(dicom::tags::institution_name) == "CAII");

    morph_op del_op;
    del_op.kind = morph_op::op_kind::remove;
    del_op.target = dicom::tags::institution_name;
    CHECK(apply_morphs(ds, {set_op, del_op}) == apply_morphs(ds, {del_op}));
    CHECK(apply_morphs(ds, {set_op, del_op}) == ds);
}

TEST_CASE("copy with absent source is skipped with a warning") {
    dicom::data_set ds;
    ds.set_string(dicom::tags::modality, dicom::vr::CS, "CT");
    morph_op copy_op;
    copy_op.kind = morph_op::op_kind::copy;
    copy_op.copy_from = dicom::tags::accession_number;
    copy_op.target = dicom::tags::patient_id;
    std::vector<std::string> warnings;
    auto out = apply_morphs(ds, {copy_op}, &warnings);
    CHECK(out == ds);
    REQUIRE(warnings.size() == 1);

    ds.set_string(dicom::tags::accession_number, dicom::vr::SH, "ACC001");
    warnings.clear();
    out = apply_morphs(ds, {copy_op}, &warnings);
    CHECK(warnings.empty());
    CHECK(out.get_string(dicom::tags::patient_id) == "ACC001");
}

TEST_CASE("morph locality: unmentioned elements serialize byte-identically") {
    testsup::rng_t rng(5);
    for (int i = 0; i < 30; ++i) {
        auto ds = testsup::random_dataset(rng);
        morph_op set_op;
        set_op.kind = morph_op::op_kind::set;
        set_op.target = dicom::tags::institution_name;
        set_op.set_vr = dicom::vr::LO;
        set_op.value = "CAII";
        morph_op del_op;
        del_op.kind = morph_op::op_kind::remove;
        del_op.target = dicom::tags::patient_name;
        auto morphed = apply_morphs(ds, {set_op, del_op});

        for (const auto& e : ds) {
            auto t = e.element_tag();
            if (t == dicom::tags::institution_name || t == dicom::tags::patient_name) continue;
            const auto* m = morphed.find(t);
            REQUIRE(m != nullptr);
            dicom::data_set lhs, rhs;
            lhs.set(e);
            rhs.set(*m);
            CHECK(dicom::serialize_dataset(lhs, dicom::uids::explicit_vr_le) ==
                  dicom::serialize_dataset(rhs, dicom::uids::explicit_vr_le));
        }
    }
}

TEST_CASE("holder swap: version discipline and rollback") {
    auto rs1 = parse_rules(kBaseConfig, 1);
    ruleset_holder holder(rs1);
    CHECK(holder.current()->version == 1);

    auto rs2 = parse_rules(kBaseConfig, 2);
    auto displaced = holder.swap(rs2);
    CHECK(displaced.version == 1);
    CHECK(holder.current()->version == 2);

    map_attributes attrs;
    attrs.set("modality", "CT");
    auto d = evaluate_instance(*holder.current(), attrs, src("m1"));
    CHECK(d.ruleset_version == 2);

    try {
        holder.swap(parse_rules(kBaseConfig, 1));
        FAIL("expected StaleVersion");
    } catch (const error& e) {
        CHECK(e.kind() == errc::stale_version);
    }

    // Roll-back re-stamps a fresh higher version.
    auto rolled = holder.swap(displaced, /*rollback=*/true);
    CHECK(rolled.version == 2);
    CHECK(holder.current()->version == 3);
}

TEST_CASE("concurrent evaluation during swaps observes single versions") {
    // Two configs that disagree about everything; each decision must be
    // internally consistent with exactly one of them.
    auto route_cfg = parse_rules(kBaseConfig, 1);
    const char* block_text = R"(
[rule deny]
when = true
block = true
)";
    ruleset_holder holder(route_cfg);
    std::atomic<bool> done {false};
    std::atomic<int> inconsistent {0};

    std::vector<std::thread> readers;
    for (int i = 0; i < 4; ++i) {
        readers.emplace_back([&] {
            map_attributes attrs;
            attrs.set("modality", "CT");
            while (!done.load()) {
                auto snapshot = holder.current();
                auto d = evaluate_instance(*snapshot, attrs, src("m1"));
                bool odd_version = (d.ruleset_version % 2) == 1;
                // odd versions route, even versions block (see writer below)
                if (odd_version != !d.blocked) inconsistent.fetch_add(1);
            }
        });
    }
    for (uint64_t v = 2; v <= 60; ++v) {
        bool block = (v % 2) == 0;
        holder.swap(block ? parse_rules(block_text, v) : parse_rules(kBaseConfig, v));
    }
    done.store(true);
    for (auto& t : readers) t.join();
    CHECK(inconsistent.load() == 0);
    CHECK(holder.current()->version == 60);
}

TEST_CASE("continue chains accumulate morphs in rule order") {
    const char* cfg = R"(
[destination pacs]
host = 127.0.0.1
port = 104
called_ae = PACS

[rule first]
when = true
morph = set (0008,0080) LO "ONE"
continue = true

[rule second]
when = true
morph = set (0010,0020) LO "TWO"
continue = true

[rule third]
when = true
route = pacs
morph = delete (0008,0080)
)";
    auto rs = parse_rules(cfg, 1);
    map_attributes attrs;
    auto d = evaluate_instance(rs, attrs, src("m1"));
    auto o = testsup::oracle_evaluate(rs, attrs, src("m1"));
    CHECK(d == o);
    REQUIRE(d.morphs.size() == 3);
    CHECK(d.morphs[0].value == "ONE");
    CHECK(d.morphs[1].value == "TWO");
    CHECK(d.morphs[2].kind == morph_op::op_kind::remove);
    CHECK(d.matched_rules.size() == 3);
}

TEST_CASE("empty ruleset blocks with no-match from both evaluators") {
    rule_set rs;
    rs.version = 9;
    map_attributes attrs;
    auto d = evaluate_instance(rs, attrs, src("m1"));
    auto o = testsup::oracle_evaluate(rs, attrs, src("m1"));
    CHECK(d == o);
    CHECK(d.blocked);
    CHECK(d.reason == "no-match");
    CHECK(d.ruleset_version == 9);
}

TEST_CASE("oracle equivalence over randomized rulesets and attributes") {
    testsup::rules_rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        auto rs = testsup::random_ruleset(rng, static_cast<uint64_t>(i + 1));
        auto attrs = testsup::random_attributes(rng);
        auto source = testsup::random_source(rng);
        auto fast = evaluate_instance(rs, attrs, source);
        auto slow = testsup::oracle_evaluate(rs, attrs, source);
        REQUIRE(fast == slow);
    }
}

TEST_CASE("format round trip yields an identical ruleset") {
    const char* cfg = R"(
[source modality1]
calling_ae = MOD1

[source ai_node]
calling_ae = AI_NODE
class = ai

[destination pacs]
host = pacs.example.org
port = 11112
called_ae = PACS
calling_ae = GATEWAY

[rule complex]
when = (modality == "CT" or modality == "MR") and not study_description ~ "(?i)phantom"
route = pacs : serial
morph = set (0008,0080) LO "CAII"
morph = copy (0008,0050) -> (0010,0020)
morph = delete (0009,0010)
priority = MEDIUM
continue = true

[rule thick]
when = slice_thickness >= 2.5
route = pacs : parallel
)";
    auto rs = parse_rules(cfg, 4);
    auto text = format_rules(rs);
    auto back = parse_rules(text, 4);
    CHECK(back == rs);
    // and the formatter is a fixed point
    CHECK(format_rules(back) == text);
}

TEST_CASE("format round trip holds for randomized rulesets") {
    testsup::rules_rng rng(11);
    for (int i = 0; i < 50; ++i) {
        auto rs = testsup::random_ruleset(rng, 1);
        auto back = parse_rules(format_rules(rs), 1);
        REQUIRE(back == rs);
    }
}
