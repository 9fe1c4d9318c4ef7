#include "flowgate/dag/runner.hpp"

#include <chrono>
#include <map>
#include <sstream>
#include <variant>

#include "flowgate/dag/graph.hpp"
#include "flowgate/dag/operators.hpp"
#include "flowgate/error.hpp"

namespace flowgate::dag {

namespace {

using port_value = std::variant<std::vector<study>, series, volume, inference_result,
                                std::filesystem::path>;

}  // namespace

std::string run_manifest::format() const {
    std::ostringstream out;
    out << "run.status = " << (ok ? "ok" : "failed") << "\n";
    if (!ok) {
        out << "run.failed_operator = " << failed_operator << "\n";
        out << "run.failure = " << failure << "\n";
    }
    for (const auto& op : operators) {
        std::string prefix = "operator." + op.name;
        out << prefix << ".kind = " << op.kind << "\n";
        out << prefix << ".executed = " << (op.executed ? "true" : "false") << "\n";
        if (op.executed) {
            char buf[32];
            snprintf(buf, sizeof(buf), "%.3f", op.wall_ms);
            out << prefix << ".wall_ms = " << buf << "\n";
        }
        if (op.failed) out << prefix << ".failure = " << op.failure << "\n";
        for (const auto& w : op.warnings) out << prefix << ".warning = " << w << "\n";
        for (const auto& o : op.outputs) out << prefix << ".output = " << o << "\n";
    }
    for (const auto& f : output_files) out << "output.file = " << f.string() << "\n";
    if (result) {
        out << "result.detection = "
            << (result->detection == sr::detection_result::pos ? "POS" : "NEG") << "\n";
        out << "result.certainty = " << result->certainty << "\n";
        if (result->bbox) {
            out << "result.bbox = " << result->bbox->x0 << "," << result->bbox->y0 << ","
                << result->bbox->x1 << "," << result->bbox->y1 << "\n";
        }
    }
    return out.str();
}

run_manifest run_app(const app_graph& g, const std::filesystem::path& input_dir,
                     const std::filesystem::path& output_dir, const run_options& options) {
    validate_dag(g);

    auto uids = options.seed ? util::uid_source::seeded_with(*options.seed)
                             : util::uid_source::system();
    auto clock = options.seed ? util::clock_source::seeded(*options.seed)
                              : util::clock_source::system();

    auto order = topological_order(g);
    std::map<std::pair<std::string, std::string>, port_value> values;

    // Producer lookup per consumer input port.
    std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>> wires;
    for (const auto& e : g.edges) {
        wires[{e.to_op, e.to_port}] = {e.from_op, e.from_port};
    }

    run_manifest manifest;
    manifest.ok = true;

    for (const auto& name : order) {
        const auto* spec = g.find_operator(name);
        operator_record rec;
        rec.name = name;
        rec.kind = spec->kind;

        // Collect inputs; a missing value means the producer failed/skipped.
        bool inputs_ready = true;
        std::map<std::string, const port_value*> inputs;
        for (const auto& p : input_ports(spec->kind)) {
            auto wire = wires.find({name, p.name});
            auto it = wire == wires.end() ? values.end() : values.find(wire->second);
            if (it == values.end()) {
                inputs_ready = false;
                break;
            }
            inputs[p.name] = &it->second;
        }
        if (!inputs_ready || !manifest.ok) {
            // downstream of a failure: skipped
            manifest.operators.push_back(std::move(rec));
            continue;
        }

        auto started = std::chrono::steady_clock::now();
        try {
            if (spec->kind == "study_loader") {
                auto studies = op_study_loader(input_dir, &rec.warnings);
                values[{name, "studies"}] = std::move(studies);
            } else if (spec->kind == "series_selector") {
                const auto& studies = std::get<std::vector<study>>(*inputs.at("studies"));
                if (studies.empty()) raise(errc::no_studies_found, "no studies to select from");
                values[{name, "series"}] = op_series_selector(studies.front(), spec->criteria);
            } else if (spec->kind == "series_to_volume") {
                values[{name, "volume"}] =
                    op_series_to_volume(std::get<series>(*inputs.at("series")));
            } else if (spec->kind == "stub_inference") {
                int threshold = options.threshold.value_or(spec->threshold);
                double min_fraction = options.min_fraction.value_or(spec->min_fraction);
                auto result = op_stub_inference(std::get<volume>(*inputs.at("volume")), threshold,
                                                min_fraction);
                manifest.result = result;
                values[{name, "result"}] = result;
            } else if (spec->kind == "sr_writer") {
                const auto& studies = std::get<std::vector<study>>(*inputs.at("studies"));
                if (studies.empty()) raise(errc::no_studies_found, "no study context");
                auto path = op_write_sr(std::get<inference_result>(*inputs.at("result")),
                                        studies.front(), output_dir, spec->evaluation_type,
                                        *uids, *clock);
                rec.outputs.push_back(path.string());
                manifest.output_files.push_back(path);
                values[{name, "file"}] = path;
            } else if (spec->kind == "sc_writer") {
                const auto& result = std::get<inference_result>(*inputs.at("result"));
                const auto& vol = std::get<volume>(*inputs.at("volume"));
                const auto& studies = std::get<std::vector<study>>(*inputs.at("studies"));
                if (studies.empty()) raise(errc::no_studies_found, "no study context");
                auto path = op_write_sc(result, vol, studies.front(), output_dir, *uids, *clock);
                rec.outputs.push_back(path.string());
                manifest.output_files.push_back(path);
                values[{name, "file"}] = path;
            }
            rec.executed = true;
        } catch (const std::exception& e) {
            rec.executed = true;
            rec.failed = true;
            rec.failure = e.what();
            manifest.ok = false;
            manifest.failed_operator = name;
            manifest.failure = e.what();
        }
        auto elapsed = std::chrono::steady_clock::now() - started;
        rec.wall_ms = std::chrono::duration<double, std::milli>(elapsed).count();
        manifest.operators.push_back(std::move(rec));
    }
    return manifest;
}

}  // namespace flowgate::dag
