#include "flowgate/sim/scenario.hpp"

#include <atomic>
#include <condition_variable>
#include <set>
#include <sstream>
#include <thread>

#include "flowgate/dag/graph.hpp"
#include "flowgate/dag/operators.hpp"
#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/dimse/scp.hpp"
#include "flowgate/dimse/scu.hpp"
#include "flowgate/error.hpp"
#include "flowgate/gateway/gateway.hpp"
#include "flowgate/hl7/codec.hpp"
#include "flowgate/rules/parser.hpp"
#include "flowgate/sim/sinks.hpp"
#include "flowgate/sr/sr.hpp"
#include "flowgate/util/sections.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::sim {

namespace fs = std::filesystem;

// --- AI receiver -------------------------------------------------------------

struct ai_receiver::impl {
    options opts;
    std::unique_ptr<dimse::store_scp> scp;
    std::thread worker;
    std::mutex mutex;
    std::condition_variable cv;
    std::chrono::steady_clock::time_point last_store {};
    size_t stored = 0;
    size_t processed = 0;
    std::atomic<size_t> runs {0};
    bool stopping = false;

    void run_pipeline() {
        std::string gw_host;
        uint16_t gw_port;
        {
            std::lock_guard<std::mutex> lock(mutex);
            gw_host = opts.gateway_host;
            gw_port = opts.gateway_port;
        }
        auto out_dir = opts.work_dir / "out";
        std::vector<std::string> warnings;
        auto studies = dag::op_study_loader(opts.work_dir / "in", &warnings);
        for (const auto& study : studies) {
            auto selected = dag::op_series_selector(study, rules::parse_match_expr(
                                                               opts.selector_criteria));
            auto vol = dag::op_series_to_volume(selected);
            auto result = dag::op_stub_inference(vol, opts.threshold, opts.min_fraction);
            auto uids = util::uid_source::seeded_with(opts.seed + runs.load());
            auto clock = util::clock_source::seeded(opts.seed + runs.load());
            auto sr_path = dag::op_write_sr(result, study, out_dir, "MONAI", *uids, *clock);

            auto sr_file = dicom::read_part10_file(sr_path.string());
            dimse::scu_store({gw_host, gw_port}, dimse::ae_title::parse(opts.ae_title),
                             dimse::ae_title::parse(opts.gateway_ae), {sr_file});
        }
        runs.fetch_add(1);
    }

    void watch() {
        while (true) {
            std::unique_lock<std::mutex> lock(mutex);
            cv.wait_for(lock, std::chrono::milliseconds(50), [&] { return stopping; });
            if (stopping) return;
            if (stored > processed &&
                std::chrono::steady_clock::now() - last_store >
                    std::chrono::milliseconds(opts.inactivity_ms)) {
                size_t batch = stored;
                lock.unlock();
                try {
                    run_pipeline();
                } catch (const std::exception&) {
                    runs.fetch_add(1);  // failed run still counts as completed work
                }
                lock.lock();
                processed = batch;
            }
        }
    }
};

ai_receiver::ai_receiver(const options& opts) : impl_(std::make_shared<impl>()) {
    impl_->opts = opts;
    fs::create_directories(opts.work_dir / "in");

    dimse::scp_listen_config cfg;
    cfg.port = 0;
    cfg.policy.served_ae_titles = {dimse::ae_title::parse(opts.ae_title)};
    impl_->scp = std::make_unique<dimse::store_scp>(
        cfg, [impl = impl_.get()](const dimse::scp_context&, dicom::dicom_file&& file) {
            auto path = impl->opts.work_dir / "in" / (file.sop_instance_uid() + ".dcm");
            dicom::write_part10_file(path.string(), file);
            std::lock_guard<std::mutex> lock(impl->mutex);
            impl->stored++;
            impl->last_store = std::chrono::steady_clock::now();
            return dimse::status::success;
        });
    impl_->worker = std::thread([impl = impl_.get()] { impl->watch(); });
}

ai_receiver::~ai_receiver() { stop(); }

uint16_t ai_receiver::port() const { return impl_->scp->port(); }

size_t ai_receiver::runs_completed() const { return impl_->runs.load(); }

void ai_receiver::set_gateway(const std::string& host, uint16_t port) {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    impl_->opts.gateway_host = host;
    impl_->opts.gateway_port = port;
}

void ai_receiver::stop() {
    {
        std::lock_guard<std::mutex> lock(impl_->mutex);
        if (impl_->stopping) return;
        impl_->stopping = true;
    }
    impl_->cv.notify_all();
    if (impl_->worker.joinable()) impl_->worker.join();
    impl_->scp->stop();
}

// --- scenario ----------------------------------------------------------------

std::string scenario_report::format() const {
    std::ostringstream out;
    for (const auto& [label, ok] : assertions) {
        out << (ok ? "PASS" : "FAIL") << "  " << label << "\n";
    }
    out << (passed ? "SCENARIO PASSED" : "SCENARIO FAILED") << " (" << assertions.size()
        << " assertions)\n";
    return out.str();
}

scenario_config parse_scenario(const std::string& text) {
    scenario_config cfg;
    cfg.study.series.clear();
    for (const auto& sec : util::scan_sections(text)) {
        if (sec.kind == "scenario") {
            if (const auto* v = sec.find("seed")) {
                cfg.seed = static_cast<uint64_t>(util::parse_integer(*v).value_or(42));
            }
            if (const auto* v = sec.find("gateway_inactivity_ms")) {
                cfg.gateway_inactivity_ms = static_cast<int>(util::parse_integer(*v).value_or(300));
            }
            if (const auto* v = sec.find("ai_inactivity_ms")) {
                cfg.ai_inactivity_ms = static_cast<int>(util::parse_integer(*v).value_or(700));
            }
            if (const auto* v = sec.find("ai_timeout_s")) {
                cfg.ai_timeout_s = static_cast<int>(util::parse_integer(*v).value_or(8));
            }
            if (const auto* v = sec.find("ai_receiver")) cfg.ai_receiver_enabled = (*v != "off");
            if (const auto* v = sec.find("selector_criteria")) cfg.selector_criteria = *v;
            if (const auto* v = sec.find("stub_threshold")) {
                cfg.stub_threshold = static_cast<int>(util::parse_integer(*v).value_or(400));
            }
            if (const auto* v = sec.find("stub_min_fraction")) {
                cfg.stub_min_fraction = util::parse_decimal(*v).value_or(0.01);
            }
            if (const auto* v = sec.find("hl7_priority_threshold")) {
                auto p = rules::priority_from_name(*v);
                if (!p) raise(errc::config_invalid, "bad hl7_priority_threshold");
                cfg.hl7_priority_threshold = *p;
            }
            if (const auto* v = sec.find("expect_detection")) cfg.expect_detection = *v;
            if (const auto* v = sec.find("expect_state")) cfg.expect_state = *v;
            if (const auto* v = sec.find("expect_mllp_messages")) {
                cfg.expect_mllp_messages =
                    static_cast<size_t>(util::parse_integer(*v).value_or(1));
            }
            if (const auto* v = sec.find("wait_timeout_s")) {
                cfg.wait_timeout_s = static_cast<int>(util::parse_integer(*v).value_or(25));
            }
        } else if (sec.kind == "study") {
            if (const auto* v = sec.find("description")) cfg.study.study_description = *v;
            if (const auto* v = sec.find("accession")) cfg.study.accession = *v;
            if (const auto* v = sec.find("patient_id")) cfg.study.patient_id = *v;
        } else if (sec.kind == "series") {
            series_spec se;
            if (const auto* v = sec.find("slices")) {
                se.slice_count = static_cast<size_t>(util::parse_integer(*v).value_or(3));
            }
            if (const auto* v = sec.find("rows")) {
                se.rows = static_cast<uint16_t>(util::parse_integer(*v).value_or(10));
            }
            if (const auto* v = sec.find("cols")) {
                se.cols = static_cast<uint16_t>(util::parse_integer(*v).value_or(10));
            }
            if (const auto* v = sec.find("slice_thickness")) {
                se.slice_thickness = util::parse_decimal(*v).value_or(3.0);
            }
            if (const auto* v = sec.find("modality")) se.modality = *v;
            if (const auto* v = sec.find("description")) se.description = *v;
            if (const auto* v = sec.find("bright_block")) {
                // x,y,w,h,value
                auto parts = util::split(*v, ',');
                if (parts.size() == 5) {
                    bright_block b;
                    b.x = static_cast<size_t>(util::parse_integer(parts[0]).value_or(0));
                    b.y = static_cast<size_t>(util::parse_integer(parts[1]).value_or(0));
                    b.width = static_cast<size_t>(util::parse_integer(parts[2]).value_or(1));
                    b.height = static_cast<size_t>(util::parse_integer(parts[3]).value_or(1));
                    b.value = static_cast<int16_t>(util::parse_integer(parts[4]).value_or(1000));
                    se.block = b;
                }
            }
            cfg.study.series.push_back(se);
        } else {
            raise(errc::config_invalid, "unknown scenario section '" + sec.kind + "'");
        }
    }
    if (cfg.study.series.empty()) cfg.study.series.push_back(series_spec {});
    cfg.study.seed = cfg.seed;
    return cfg;
}

scenario_report run_scenario_e2e(const scenario_config& config) {
    scenario_report report;
    fs::path work = config.work_dir.empty()
                        ? fs::temp_directory_path() / ("flowgate_scenario_" +
                                                       std::to_string(::getpid()) + "_" +
                                                       std::to_string(config.seed))
                        : config.work_dir;
    fs::remove_all(work);
    fs::create_directories(work);

    // Sinks.
    store_sink pacs(0, "PACS", work / "pacs");
    store_sink viewer(0, "VIEWER", work / "viewer");
    mllp_sink interface_engine(0, mllp_ack_mode::aa, work / "mllp");

    // AI receiver (optional; the timeout scenario leaves it off).
    std::unique_ptr<ai_receiver> ai;

    // Gateway.
    gateway::gateway_config cfg;
    cfg.ae_title = dimse::ae_title::parse("FLOWGATE");
    cfg.hl7_host = "127.0.0.1";
    cfg.hl7_port = interface_engine.port();
    cfg.hl7_priority_threshold = config.hl7_priority_threshold;
    cfg.retry_max = 3;
    cfg.retry_backoff_ms = 100;
    cfg.ai_timeout_s = config.ai_timeout_s;
    cfg.study_inactivity_ms = config.gateway_inactivity_ms;
    cfg.quarantine_dir = (work / "quarantine").string();
    cfg.dead_letter_dir = (work / "dead_letter").string();
    cfg.audit_file = (work / "audit.log").string();
    cfg.viewer_dests = {"viewer"};
    cfg.ai_dests = {"ai_receiver"};
    cfg.mapping = sr::parse_mapping_template(
        "map AI_PRIORITY concept 99FLOWGATE:PRIORITY { HIGH=HIGH, MEDIUM=MEDIUM, LOW=LOW }\n"
        "map AI_DETECTION concept 99FLOWGATE:DETECTION { POS=POS, NEG=NEG }\n");

    uint16_t ai_port = 0;
    if (config.ai_receiver_enabled) {
        // The receiver starts first so its port can appear in the rules; the
        // gateway endpoint is injected right after the gateway binds.
        ai_receiver::options ai_opts;
        ai_opts.work_dir = work / "ai";
        ai_opts.inactivity_ms = config.ai_inactivity_ms;
        ai_opts.selector_criteria = config.selector_criteria;
        ai_opts.threshold = config.stub_threshold;
        ai_opts.min_fraction = config.stub_min_fraction;
        ai_opts.seed = config.seed;
        ai = std::make_unique<ai_receiver>(ai_opts);
        ai_port = ai->port();
    } else {
        util::tcp_listener probe = util::tcp_listener::bind(0);
        ai_port = probe.port();
        probe.close();  // dead port: AI deliveries will fail and dead-letter
    }

    std::ostringstream rules_text;
    rules_text << "[source modality1]\ncalling_ae = MODALITY1\n\n"
               << "[source ai_node]\ncalling_ae = AI_NODE\nclass = ai\n\n"
               << "[destination pacs]\nhost = 127.0.0.1\nport = " << pacs.port()
               << "\ncalled_ae = PACS\n\n"
               << "[destination viewer]\nhost = 127.0.0.1\nport = " << viewer.port()
               << "\ncalled_ae = VIEWER\n\n"
               << "[destination ai_receiver]\nhost = 127.0.0.1\nport = " << ai_port
               << "\ncalled_ae = AI_NODE\n\n"
               << "[rule images_to_pacs_and_ai]\nwhen = modality == \"CT\"\n"
               << "route = pacs, ai_receiver : parallel\n";
    cfg.routing = rules::parse_rules(rules_text.str(), 1);

    gateway::gateway_service gw(std::move(cfg));

    if (ai) ai->set_gateway("127.0.0.1", gw.dicom_port());

    report.expect("gateway listening", gw.dicom_port() != 0);

    // Synthetic study in, via the modality CLI path.
    auto study_dir = work / "study";
    synthetic_study_spec spec = config.study;
    spec.seed = config.seed;
    auto paths = gen_synthetic_study(spec, study_dir);
    std::vector<dicom::dicom_file> files;
    for (const auto& p : paths) files.push_back(dicom::read_part10_file(p.string()));

    auto results = dimse::scu_store({"127.0.0.1", gw.dicom_port()},
                                    dimse::ae_title::parse("MODALITY1"),
                                    dimse::ae_title::parse("FLOWGATE"), files);
    size_t sent_ok = 0;
    for (const auto& r : results) {
        if (r.ok()) ++sent_ok;
    }
    report.expect("modality sent " + std::to_string(files.size()) + " instances",
                  sent_ok == files.size());

    std::string study_uid = synthetic_study_uid(spec);

    // Wait for the expected terminal state.
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(config.wait_timeout_s);
    std::string final_state;
    while (std::chrono::steady_clock::now() < deadline) {
        auto record = gw.study(study_uid);
        if (record) {
            final_state = gateway::study_state_name(record->state);
            if (final_state == config.expect_state) break;
            if (record->state == gateway::study_state::failed &&
                config.expect_state != "FAILED") {
                break;
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    gw.drain();

    report.expect("study reached " + config.expect_state + " (got " + final_state + ")",
                  final_state == config.expect_state);

    // PACS holds every instance.
    auto pacs_manifest = pacs.manifest();
    std::set<std::string> pacs_uids;
    for (const auto& r : pacs_manifest) pacs_uids.insert(r.sop_instance_uid);
    size_t expected_instances = 0;
    for (const auto& se : spec.series) expected_instances += se.slice_count;
    report.expect("PACS sink holds all " + std::to_string(expected_instances) + " instances",
                  pacs_uids.size() == expected_instances);

    if (config.ai_receiver_enabled) {
        // Viewer received the SR.
        bool viewer_has_sr = false;
        std::string viewer_detection;
        for (const auto& entry : fs::directory_iterator(viewer.directory())) {
            if (entry.path().extension() != ".dcm") continue;
            try {
                auto f = dicom::read_part10_file(entry.path().string());
                if (dicom::uids::is_sr_sop_class(f.sop_class_uid())) {
                    viewer_has_sr = true;
                    auto tree = sr::parse_sr_tree(f);
                    if (const auto* det = tree.find_concept(sr::concepts::detection())) {
                        viewer_detection = det->code_value.value;
                    }
                }
            } catch (const std::exception&) {
            }
        }
        report.expect("viewer sink holds the SR", viewer_has_sr);
        report.expect("SR detection is " + config.expect_detection,
                      viewer_detection == config.expect_detection);
    }

    // Interface engine.
    report.expect("MLLP sink holds " + std::to_string(config.expect_mllp_messages) + " message(s)",
                  interface_engine.message_count() == config.expect_mllp_messages);
    if (config.expect_mllp_messages == 1 && interface_engine.message_count() == 1) {
        auto messages = interface_engine.messages();
        bool obx_ok = false;
        try {
            auto msg = hl7::parse_message(messages.front());
            for (const auto& seg : msg.segments) {
                if (seg.id == "OBX" && seg.text(3) == "AI_DETECTION_MONAI" &&
                    seg.text(5) == config.expect_detection) {
                    obx_ok = true;
                }
            }
        } catch (const std::exception&) {
        }
        report.expect("ORM carries OBX AI_DETECTION_MONAI||" + config.expect_detection, obx_ok);
    }

    // Audit completeness.
    gateway::audit_filter by_study;
    by_study.study_uid = study_uid;
    auto events = gateway::audit_log::query_file((work / "audit.log").string(), by_study);
    auto has = [&](gateway::audit_category c, size_t at_least) {
        size_t n = 0;
        for (const auto& e : events) {
            if (e.category == c) ++n;
        }
        return n >= at_least;
    };
    report.expect("audit has received events", has(gateway::audit_category::received,
                                                   expected_instances));
    report.expect("audit has decision events", has(gateway::audit_category::decision,
                                                   expected_instances));
    report.expect("audit has forwarded events", has(gateway::audit_category::forwarded, 1));
    if (config.ai_receiver_enabled) {
        report.expect("audit has ai_result event", has(gateway::audit_category::ai_result, 1));
    }
    if (config.expect_state == "HL7_SENT") {
        report.expect("audit has hl7_sent event", has(gateway::audit_category::hl7_sent, 1));
    }
    if (config.expect_state == "FAILED") {
        report.expect("audit records the timeout", has(gateway::audit_category::error, 1));
    }

    if (ai) ai->stop();
    gw.stop();
    pacs.stop();
    viewer.stop();
    interface_engine.stop();
    return report;
}

}  // namespace flowgate::sim
