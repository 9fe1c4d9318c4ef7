// flowgate-sim: modality/PACS/interface-engine simulators and the
// end-to-end scenario runner.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "flowgate/dicom/part10.hpp"
#include "flowgate/dimse/scu.hpp"
#include "flowgate/sim/scenario.hpp"
#include "flowgate/sim/sinks.hpp"
#include "flowgate/sim/synth.hpp"
#include "flowgate/util/strings.hpp"

namespace {

std::atomic<bool> g_stop {false};

void on_signal(int) { g_stop.store(true); }

void wait_for_signal() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
}

// "SxRxC@T" e.g. "3x10x10@3.0"
flowgate::sim::series_spec parse_series_token(const std::string& token) {
    using flowgate::util::parse_decimal;
    using flowgate::util::parse_integer;
    flowgate::sim::series_spec se;
    auto at = token.find('@');
    std::string dims = at == std::string::npos ? token : token.substr(0, at);
    if (at != std::string::npos) {
        se.slice_thickness = parse_decimal(token.substr(at + 1)).value_or(3.0);
    }
    auto parts = flowgate::util::split(dims, 'x');
    if (parts.size() == 3) {
        se.slice_count = static_cast<size_t>(parse_integer(parts[0]).value_or(3));
        se.rows = static_cast<uint16_t>(parse_integer(parts[1]).value_or(10));
        se.cols = static_cast<uint16_t>(parse_integer(parts[2]).value_or(10));
    }
    return se;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace flowgate;

    CLI::App app {"flowgate-sim - pipeline simulators and scenario runner"};
    app.require_subcommand(1);

    // gen
    std::string out_dir;
    uint64_t seed = 42;
    std::vector<std::string> series_tokens;
    std::string bright;
    auto* gen = app.add_subcommand("gen", "generate a synthetic study");
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--seed", seed, "study seed");
    gen->add_option("--series", series_tokens, "series as SLICESxROWSxCOLS@THICKNESS");
    gen->add_option("--bright", bright, "bright block x,y,w,h,value on the first series");

    // send
    std::string dir;
    std::string host = "127.0.0.1";
    uint16_t port = 0;
    std::string calling = "MODALITY1";
    std::string called = "FLOWGATE";
    auto* send = app.add_subcommand("send", "store every DICOM file in a directory");
    send->add_option("--dir", dir, "directory of Part 10 files")->required();
    send->add_option("--host", host, "peer host");
    send->add_option("--port", port, "peer port")->required();
    send->add_option("--calling", calling, "calling AE title");
    send->add_option("--called", called, "called AE title");

    // sink
    uint16_t sink_port = 0;
    std::string sink_ae = "PACS";
    std::string sink_out = "sink_out";
    std::string behavior;
    auto* sink = app.add_subcommand("sink", "run a storage sink (PACS/viewer stand-in)");
    sink->add_option("--port", sink_port, "listen port (0 picks one)");
    sink->add_option("--ae", sink_ae, "served AE title");
    sink->add_option("--out", sink_out, "storage directory");
    sink->add_option("--behavior", behavior, "script, e.g. \"delay=300 fail_first=2 status=A700\"");

    // mllp-sink
    uint16_t mllp_port = 0;
    std::string mode = "AA";
    std::string mllp_out = "mllp_out";
    auto* msink = app.add_subcommand("mllp-sink", "run an interface-engine stand-in");
    msink->add_option("--port", mllp_port, "listen port (0 picks one)");
    msink->add_option("--mode", mode, "AA | AE | none");
    msink->add_option("--out", mllp_out, "message directory");

    // scenario
    std::string scenario_path;
    std::string work_dir;
    auto* scenario = app.add_subcommand("scenario", "run an end-to-end scenario");
    scenario->add_option("--config", scenario_path, "scenario config file")->required();
    scenario->add_option("--work", work_dir, "working directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            sim::synthetic_study_spec spec;
            spec.seed = seed;
            spec.series.clear();
            for (const auto& token : series_tokens) {
                spec.series.push_back(parse_series_token(token));
            }
            if (spec.series.empty()) spec.series.push_back(sim::series_spec {});
            if (!bright.empty()) {
                auto parts = util::split(bright, ',');
                if (parts.size() == 5) {
                    sim::bright_block b;
                    b.x = static_cast<size_t>(util::parse_integer(parts[0]).value_or(0));
                    b.y = static_cast<size_t>(util::parse_integer(parts[1]).value_or(0));
                    b.width = static_cast<size_t>(util::parse_integer(parts[2]).value_or(1));
                    b.height = static_cast<size_t>(util::parse_integer(parts[3]).value_or(1));
                    b.value =
                        static_cast<int16_t>(util::parse_integer(parts[4]).value_or(1000));
                    spec.series.front().block = b;
                }
            }
            auto files = sim::gen_synthetic_study(spec, out_dir);
            std::cout << files.size() << " files written to " << out_dir << " (study "
                      << sim::synthetic_study_uid(spec) << ")\n";
            return 0;
        }
        if (send->parsed()) {
            std::vector<dicom::dicom_file> files;
            std::vector<std::filesystem::path> paths;
            for (const auto& entry : std::filesystem::directory_iterator(dir)) {
                if (entry.is_regular_file() && entry.path().extension() == ".dcm") {
                    paths.push_back(entry.path());
                }
            }
            std::sort(paths.begin(), paths.end());
            for (const auto& p : paths) files.push_back(dicom::read_part10_file(p.string()));
            if (files.empty()) {
                std::cerr << "no .dcm files in " << dir << "\n";
                return 2;
            }
            auto results = dimse::scu_store({host, port}, dimse::ae_title::parse(calling),
                                            dimse::ae_title::parse(called), files);
            size_t ok = 0;
            for (size_t i = 0; i < results.size(); ++i) {
                if (results[i].ok()) {
                    ++ok;
                } else {
                    char buf[8];
                    snprintf(buf, sizeof(buf), "%04X", results[i].status);
                    std::cout << paths[i].filename().string() << ": status 0x" << buf << "\n";
                }
            }
            std::cout << results.size() << " sent, " << ok << " success\n";
            return ok == results.size() ? 0 : 1;
        }
        if (sink->parsed()) {
            sim::store_sink s(sink_port, sink_ae, sink_out, sim::parse_behavior(behavior));
            std::cout << "storage sink '" << sink_ae << "' on port " << s.port() << ", storing to "
                      << sink_out << "\n";
            wait_for_signal();
            s.stop();
            return 0;
        }
        if (msink->parsed()) {
            sim::mllp_ack_mode m = sim::mllp_ack_mode::aa;
            if (mode == "AE") m = sim::mllp_ack_mode::ae;
            else if (mode == "none") m = sim::mllp_ack_mode::none;
            else if (mode != "AA") {
                std::cerr << "mode must be AA, AE or none\n";
                return 2;
            }
            sim::mllp_sink s(mllp_port, m, mllp_out);
            std::cout << "MLLP sink on port " << s.port() << ", storing to " << mllp_out << "\n";
            wait_for_signal();
            s.stop();
            return 0;
        }
        if (scenario->parsed()) {
            std::ifstream in(scenario_path);
            if (!in) {
                std::cerr << "cannot open " << scenario_path << "\n";
                return 2;
            }
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            auto cfg = sim::parse_scenario(text);
            if (!work_dir.empty()) cfg.work_dir = work_dir;
            auto report = sim::run_scenario_e2e(cfg);
            std::cout << report.format();
            return report.passed ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
