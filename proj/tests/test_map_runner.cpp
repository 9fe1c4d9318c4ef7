#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "flowgate/dag/graph.hpp"
#include "flowgate/dag/operators.hpp"
#include "flowgate/dag/runner.hpp"
#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/part10.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/error.hpp"
#include "flowgate/rules/parser.hpp"
#include "flowgate/util/strings.hpp"
#include "flowgate/sim/synth.hpp"
#include "flowgate/sr/sr.hpp"

using namespace flowgate;
using namespace flowgate::dag;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("flowgate_test_" + name + "_" +
                                            std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// In-memory slice builder for volume tests.
dicom::data_set make_slice(uint16_t rows, uint16_t cols, double z, int number,
                           const std::vector<int16_t>& values, const std::string& uid_suffix) {
    using dicom::vr;
    namespace tags = dicom::tags;
    dicom::data_set ds;
    ds.set_string(tags::sop_instance_uid, vr::UI, "1.2.3." + uid_suffix);
    ds.set_string(tags::instance_number, vr::IS, std::to_string(number));
    ds.set_string(tags::image_position_patient, vr::DS, "0\\0\\" + util::format_decimal(z));
    ds.set_string(tags::image_orientation_patient, vr::DS, "1\\0\\0\\0\\1\\0");
    ds.set_u16(tags::rows, vr::US, rows);
    ds.set_u16(tags::columns, vr::US, cols);
    util::byte_buffer pixels(static_cast<size_t>(rows) * cols * 2, 0);
    for (size_t i = 0; i < values.size() && i < pixels.size() / 2; ++i) {
        auto v = static_cast<uint16_t>(values[i]);
        pixels[2 * i] = static_cast<uint8_t>(v & 0xFF);
        pixels[2 * i + 1] = static_cast<uint8_t>(v >> 8);
    }
    ds.set_bytes(tags::pixel_data, vr::OW, std::move(pixels));
    return ds;
}

series make_series(std::vector<dicom::data_set> instances) {
    series s;
    s.series_uid = "1.2.3.400";
    s.instances = std::move(instances);
    return s;
}

app_graph full_chain_graph() {
    const char* text = R"(
[operator loader]
kind = study_loader

[operator selector]
kind = series_selector
criteria = slice_thickness >= 2.0

[operator to_volume]
kind = series_to_volume

[operator inference]
kind = stub_inference
threshold = 400
min_fraction = 0.01

[operator write_sr]
kind = sr_writer

[edge]
from = loader.studies
to = selector.studies

[edge]
from = selector.series
to = to_volume.series

[edge]
from = to_volume.volume
to = inference.volume

[edge]
from = inference.result
to = write_sr.result

[edge]
from = loader.studies
to = write_sr.studies
)";
    return parse_graph(text);
}

}  // namespace

TEST_CASE("full chain validates; wiring mistakes are rejected") {
    auto g = full_chain_graph();
    validate_dag(g);

    SUBCASE("cycle") {
        // close a loop with a type-compatible back edge
        g.operators.push_back({"selector2", "series_selector", "true",
                               rules::parse_match_expr("true"), 400, 0.01, "MONAI"});
        // feed selector2 from loader, then cycle selector2 <-> nothing; instead
        // rewire: to_volume.series must come from selector2, which needs studies...
        // Simplest true cycle: duplicate chain where a->b->a via same types is
        // impossible with these signatures, so test topological_order directly.
        app_graph cyclic;
        cyclic.operators = {{"a", "series_selector", "true", rules::parse_match_expr("true"), 0, 0, ""},
                            {"b", "series_selector", "true", rules::parse_match_expr("true"), 0, 0, ""}};
        cyclic.edges = {{"a", "series", "b", "studies"}, {"b", "series", "a", "studies"}};
        try {
            topological_order(cyclic);
            FAIL("expected CycleDetected");
        } catch (const error& e) {
            CHECK(e.kind() == errc::cycle_detected);
            CHECK(std::string(e.what()).find("a") != std::string::npos);
        }
    }
    SUBCASE("port type mismatch") {
        auto bad = full_chain_graph();
        // selector output (series) wired into write_sr.result (inference)
        for (auto& e : bad.edges) {
            if (e.to_port == "result") {
                e.from_op = "selector";
                e.from_port = "series";
            }
        }
        try {
            validate_dag(bad);
            FAIL("expected PortTypeMismatch");
        } catch (const error& e) {
            CHECK(e.kind() == errc::port_type_mismatch);
        }
    }
    SUBCASE("dangling input") {
        auto bad = full_chain_graph();
        bad.edges.pop_back();  // write_sr.studies left unwired
        try {
            validate_dag(bad);
            FAIL("expected DanglingInput");
        } catch (const error& e) {
            CHECK(e.kind() == errc::dangling_input);
        }
    }
}

TEST_CASE("study loader groups and sorts; parse failures become warnings") {
    auto dir = fresh_dir("loader");

    sim::synthetic_study_spec spec;
    spec.seed = 100;
    spec.series = {sim::series_spec {3, 4, 4, 3.0, "CT", "THICK", {}},
                   sim::series_spec {3, 4, 4, 0.625, "CT", "THIN", {}}};
    sim::gen_synthetic_study(spec, dir);

    std::ofstream(dir / "notes.txt") << "not a dicom file";

    std::vector<std::string> warnings;
    auto studies = op_study_loader(dir, &warnings);
    REQUIRE(studies.size() == 1);
    REQUIRE(studies[0].series_list.size() == 2);
    CHECK(studies[0].series_list[0].instances.size() == 3);
    CHECK(studies[0].series_list[1].instances.size() == 3);
    CHECK(warnings.size() == 1);

    // instance order follows InstanceNumber regardless of file order
    for (const auto& se : studies[0].series_list) {
        long long prev = 0;
        for (const auto& inst : se.instances) {
            auto n = inst.get_integer(dicom::tags::instance_number).value();
            CHECK(n > prev);
            prev = n;
        }
    }

    SUBCASE("two studies interleaved in one dir") {
        sim::synthetic_study_spec other = spec;
        other.seed = 101;
        auto dir2 = fresh_dir("loader2");
        sim::gen_synthetic_study(other, dir2);
        for (const auto& f : fs::directory_iterator(dir2)) {
            fs::copy_file(f.path(), dir / ("b_" + f.path().filename().string()));
        }
        auto two = op_study_loader(dir);
        CHECK(two.size() == 2);
        fs::remove_all(dir2);
    }

    SUBCASE("empty directory") {
        auto empty = fresh_dir("loader_empty");
        try {
            op_study_loader(empty);
            FAIL("expected NoStudiesFound");
        } catch (const error& e) {
            CHECK(e.kind() == errc::no_studies_found);
        }
        fs::remove_all(empty);
    }
    fs::remove_all(dir);
}

TEST_CASE("series selector picks by criteria with UID tie-break") {
    study s;
    series thin;
    thin.series_uid = "1.2.3.2";
    thin.slice_thickness = 0.625;
    series thick;
    thick.series_uid = "1.2.3.1";
    thick.slice_thickness = 3.0;
    s.series_list = {thick, thin};  // sorted by UID already

    auto criteria = rules::parse_match_expr("slice_thickness >= 2.0");
    CHECK(op_series_selector(s, criteria).series_uid == "1.2.3.1");

    auto none = rules::parse_match_expr("slice_thickness >= 99.0");
    try {
        op_series_selector(s, none);
        FAIL("expected NoMatchingSeries");
    } catch (const error& e) {
        CHECK(e.kind() == errc::no_matching_series);
    }

    // both match -> lexicographically smaller series UID wins
    series thick2 = thick;
    thick2.series_uid = "1.2.3.0";
    s.series_list = {thick2, thick};
    CHECK(op_series_selector(s, criteria).series_uid == "1.2.3.0");
}

TEST_CASE("series_to_volume stacks by IPP projection") {
    auto slices = std::vector<dicom::data_set> {
        make_slice(2, 2, 0.0, 1, {1, 2, 3, 4}, "1"),
        make_slice(2, 2, 2.5, 2, {5, 6, 7, 8}, "2"),
        make_slice(2, 2, 5.0, 3, {9, 10, 11, 12}, "3"),
    };
    auto v = op_series_to_volume(make_series(slices));
    CHECK(v.nz == 3);
    CHECK(v.ny == 2);
    CHECK(v.nx == 2);
    CHECK(v.dz == doctest::Approx(2.5));
    CHECK(v.voxels.size() == 12);
    CHECK(v.at(0, 0, 0) == 1);
    CHECK(v.at(2, 1, 1) == 12);

    SUBCASE("shuffled input order yields the identical volume") {
        std::vector<dicom::data_set> shuffled = {slices[2], slices[0], slices[1]};
        auto v2 = op_series_to_volume(make_series(shuffled));
        CHECK(v2.voxels == v.voxels);
        CHECK(v2.dz == v.dz);
    }

    SUBCASE("non-uniform spacing rejected") {
        // gaps 2.5 and 5.0 against mean 3.75: 33% deviation
        std::vector<dicom::data_set> uneven = {
            make_slice(2, 2, 0.0, 1, {}, "1"),
            make_slice(2, 2, 2.5, 2, {}, "2"),
            make_slice(2, 2, 7.5, 3, {}, "3"),
        };
        try {
            op_series_to_volume(make_series(uneven));
            FAIL("expected NonUniformSpacing");
        } catch (const error& e) {
            CHECK(e.kind() == errc::non_uniform_spacing);
        }
    }

    SUBCASE("inconsistent dimensions rejected") {
        std::vector<dicom::data_set> mixed = {
            make_slice(2, 2, 0.0, 1, {}, "1"),
            make_slice(4, 4, 2.5, 2, {}, "2"),
        };
        CHECK_THROWS_AS(op_series_to_volume(make_series(mixed)), error);
    }
}

TEST_CASE("stub inference hand-checked cases") {
    SUBCASE("all-zero volume is negative") {
        volume v;
        v.nz = 3;
        v.ny = 8;
        v.nx = 8;
        v.voxels.assign(3 * 8 * 8, 0);
        auto r = op_stub_inference(v);
        CHECK(r.detection == sr::detection_result::neg);
        CHECK(r.certainty == 0);
        CHECK_FALSE(r.bbox.has_value());
    }

    SUBCASE("2-of-100 bright voxels at defaults") {
        // rows 2-3 of column 5 at 1000: r = 0.02
        volume v;
        v.nz = 1;
        v.ny = 10;
        v.nx = 10;
        v.voxels.assign(100, 0);
        v.voxels[2 * 10 + 5] = 1000;
        v.voxels[3 * 10 + 5] = 1000;

        auto r = op_stub_inference(v, 400, 0.01);
        CHECK(r.detection == sr::detection_result::pos);
        CHECK(r.fraction == doctest::Approx(0.02));
        CHECK(r.certainty == 10);  // min(10, floor(10*0.02/0.01)) = min(10, 20)
        REQUIRE(r.bbox.has_value());
        CHECK(*r.bbox == sr::pixel_box {5, 2, 5, 3});

        auto r2 = op_stub_inference(v, 400, 0.05);
        CHECK(r2.detection == sr::detection_result::neg);
        CHECK(r2.certainty == 0);
        CHECK_FALSE(r2.bbox.has_value());
    }

    SUBCASE("empty volume") {
        volume v;
        CHECK_THROWS_AS(op_stub_inference(v), error);
    }
}

TEST_CASE("stub monotonicity: adding bright voxels never weakens the result") {
    std::mt19937_64 rng(77);
    volume v;
    v.nz = 1;
    v.ny = 12;
    v.nx = 12;
    v.voxels.assign(144, 0);
    auto prev = op_stub_inference(v, 400, 0.02);
    for (int step = 0; step < 40; ++step) {
        v.voxels[rng() % 144] = 1000;
        auto next = op_stub_inference(v, 400, 0.02);
        if (prev.detection == sr::detection_result::pos) {
            CHECK(next.detection == sr::detection_result::pos);
            CHECK(next.certainty >= prev.certainty);
        }
        prev = next;
    }
}

TEST_CASE("volume shape invariant over randomized series") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 40; ++i) {
        uint16_t rows = static_cast<uint16_t>(2 + rng() % 6);
        uint16_t cols = static_cast<uint16_t>(2 + rng() % 6);
        size_t slices = 1 + rng() % 5;
        std::vector<dicom::data_set> ds_list;
        for (size_t z = 0; z < slices; ++z) {
            ds_list.push_back(make_slice(rows, cols, 2.0 * static_cast<double>(z),
                                         static_cast<int>(z + 1), {}, std::to_string(z)));
        }
        auto v = op_series_to_volume(make_series(ds_list));
        CHECK(v.nz * v.ny * v.nx == v.voxels.size());
        CHECK(v.nz == slices);
    }
}

TEST_CASE("run_app executes the full chain and writes an SR") {
    auto input = fresh_dir("run_in");
    auto output = fresh_dir("run_out");

    sim::synthetic_study_spec spec;
    spec.seed = 7;
    spec.series = {sim::series_spec {3, 10, 10, 3.0, "CT", "AXIAL",
                                     sim::bright_block {5, 2, 1, 2, 1000}}};
    sim::gen_synthetic_study(spec, input);

    auto g = full_chain_graph();
    run_options opts;
    opts.seed = 11;
    auto manifest = run_app(g, input, output, opts);

    CHECK(manifest.ok);
    CHECK(manifest.operators.size() == 5);
    for (const auto& op : manifest.operators) CHECK(op.executed);
    REQUIRE(manifest.output_files.size() == 1);
    REQUIRE(manifest.result.has_value());
    CHECK(manifest.result->detection == sr::detection_result::pos);
    CHECK(manifest.result->certainty == 10);

    auto sr_file = dicom::read_part10_file(manifest.output_files[0].string());
    auto tree = sr::parse_sr_tree(sr_file);
    const auto* det = tree.find_concept(sr::concepts::detection());
    REQUIRE(det != nullptr);
    CHECK(det->code_value.value == "POS");
    CHECK(sr_file.dataset.get_string_or(dicom::tags::study_instance_uid, "") ==
          sim::synthetic_study_uid(spec));

    SUBCASE("seeded rerun reproduces the SR byte for byte") {
        auto output2 = fresh_dir("run_out2");
        auto manifest2 = run_app(g, input, output2, opts);
        REQUIRE(manifest2.ok);
        std::ifstream a(manifest.output_files[0], std::ios::binary);
        std::ifstream b(manifest2.output_files[0], std::ios::binary);
        std::string ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        CHECK(ba == bb);
        fs::remove_all(output2);
    }

    SUBCASE("unseeded reruns differ only in SOP/series UID and timestamps") {
        auto out_a = fresh_dir("run_out_a");
        auto out_b = fresh_dir("run_out_b");
        run_options unseeded;
        auto ma = run_app(g, input, out_a, unseeded);
        auto mb = run_app(g, input, out_b, unseeded);
        REQUIRE(ma.ok);
        REQUIRE(mb.ok);
        auto fa = dicom::read_part10_file(ma.output_files[0].string());
        auto fb = dicom::read_part10_file(mb.output_files[0].string());
        for (dicom::tag t : {dicom::tags::sop_instance_uid, dicom::tags::series_instance_uid,
                             dicom::tags::content_date, dicom::tags::content_time}) {
            fa.dataset.remove(t);
            fb.dataset.remove(t);
            fa.file_meta.remove(dicom::tags::media_sop_instance_uid);
            fb.file_meta.remove(dicom::tags::media_sop_instance_uid);
        }
        CHECK(fa.dataset == fb.dataset);
        fs::remove_all(out_a);
        fs::remove_all(out_b);
    }

    fs::remove_all(input);
    fs::remove_all(output);
}

TEST_CASE("run_app on an empty input dir fails at the loader") {
    auto input = fresh_dir("run_empty");
    auto output = fresh_dir("run_empty_out");
    auto manifest = run_app(full_chain_graph(), input, output);
    CHECK_FALSE(manifest.ok);
    CHECK(manifest.failed_operator == "loader");
    CHECK(manifest.failure.find("NoStudiesFound") != std::string::npos);
    // downstream skipped
    int executed = 0;
    for (const auto& op : manifest.operators) {
        if (op.executed) ++executed;
    }
    CHECK(executed == 1);
    fs::remove_all(input);
    fs::remove_all(output);
}

TEST_CASE("slice-order permutation invariance through the full pipeline") {
    std::mt19937_64 rng(19);
    auto base = fresh_dir("perm_base");
    sim::synthetic_study_spec spec;
    spec.seed = 55;
    spec.series = {sim::series_spec {4, 6, 6, 2.0, "CT", "AXIAL",
                                     sim::bright_block {1, 1, 2, 2, 900}}};
    sim::gen_synthetic_study(spec, base);

    auto studies = op_study_loader(base);
    auto reference = op_series_to_volume(studies[0].series_list[0]);

    for (int trial = 0; trial < 20; ++trial) {
        auto shuffled = studies[0].series_list[0];
        std::shuffle(shuffled.instances.begin(), shuffled.instances.end(), rng);
        auto v = op_series_to_volume(shuffled);
        REQUIRE(v.voxels == reference.voxels);
        auto r = op_stub_inference(v, 400, 0.01);
        auto r0 = op_stub_inference(reference, 400, 0.01);
        CHECK(r.detection == r0.detection);
        CHECK(r.certainty == r0.certainty);
        CHECK(r.bbox == r0.bbox);
    }
    fs::remove_all(base);
}

TEST_CASE("graph file parse errors") {
    CHECK_THROWS_AS(parse_graph("[operator x]\n"), error);            // no kind
    CHECK_THROWS_AS(parse_graph("[edge]\nfrom = a.b\n"), error);      // no to
    CHECK_THROWS_AS(parse_graph("[wat]\nkind = study_loader\n"), error);
    auto g = parse_graph("[operator x]\nkind = nope\n");
    CHECK_THROWS_AS(validate_dag(g), error);  // unknown kind
}
