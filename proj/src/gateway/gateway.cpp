#include "flowgate/gateway/gateway.hpp"

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/dimse/scp.hpp"
#include "flowgate/error.hpp"
#include "flowgate/gateway/dispatch.hpp"
#include "flowgate/hl7/codec.hpp"
#include "flowgate/hl7/mllp.hpp"
#include "flowgate/hl7/orm.hpp"
#include "flowgate/rules/engine.hpp"
#include "flowgate/rules/holder.hpp"
#include "flowgate/sr/mapping.hpp"
#include "flowgate/sr/sr.hpp"
#include "flowgate/util/clock.hpp"
#include "flowgate/util/strings.hpp"
#include "flowgate/util/uid.hpp"

namespace flowgate::gateway {

namespace fs = std::filesystem;
namespace tags = dicom::tags;

namespace {

// DIMSE status for stores from callers the config refuses to serve.
constexpr uint16_t kStatusNotAuthorized = 0x0124;

std::string join(const std::vector<std::string>& parts, const char* sep = ",") {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

struct gateway_service::impl {
    gateway_config config;
    rules::ruleset_holder rules_holder;
    audit_log audit;
    study_registry registry;
    std::unique_ptr<dispatcher> forwarder;
    std::unique_ptr<dimse::store_scp> scp;
    util::tcp_listener admin_listener;
    std::thread admin_thread;
    std::thread timer_thread;
    std::shared_ptr<util::uid_source> uid_gen = util::uid_source::system();
    std::shared_ptr<util::clock_source> wall_clock = util::clock_source::system();

    std::mutex lifecycle_mutex;
    std::condition_variable lifecycle_cv;
    bool stopping = false;

    // Per-SR viewer fan-out tracking: SOP instance UID -> outstanding count.
    struct fanout_state {
        int remaining = 0;
        bool all_delivered = true;
    };
    std::mutex fanout_mutex;
    std::condition_variable fanout_cv;
    std::map<std::string, fanout_state> fanout;

    std::mutex hl7_mutex;
    std::vector<std::thread> hl7_threads;
    std::atomic<int> hl7_outstanding {0};

    explicit impl(gateway_config cfg)
        : config(std::move(cfg)), rules_holder(config.routing), audit(config.audit_file) {}

    uint64_t version() const { return rules_holder.current()->version; }

    std::string stamp() { return wall_clock->timestamp(); }

    // --- inbound dispatch -----------------------------------------------

    uint16_t handle_store(const dimse::scp_context& ctx, dicom::dicom_file&& file) {
        auto snapshot = rules_holder.current();
        const auto* source = snapshot->find_source_by_ae(ctx.calling);
        rules::source_def unknown_source;
        if (source == nullptr) {
            if (!config.allow_unknown_sources) {
                audit.append(audit_category::error, "",
                             "store from unknown calling AE " + ctx.calling.value() + " refused",
                             snapshot->version);
                return kStatusNotAuthorized;
            }
            unknown_source.name = "unknown:" + ctx.calling.value();
            unknown_source.calling_ae = ctx.calling;
            source = &unknown_source;
        }
        if (source->source_class == "ai") {
            return handle_ai_result(*snapshot, *source, std::move(file));
        }
        return handle_inbound_instance(*snapshot, *source, std::move(file));
    }

    uint16_t handle_inbound_instance(const rules::rule_set& rs, const rules::source_def& source,
                                     dicom::dicom_file&& file) {
        std::string study_uid = file.dataset.get_string_or(tags::study_instance_uid, "");
        std::string sop_uid = file.sop_instance_uid();
        if (study_uid.empty()) {
            audit.append(audit_category::error, "",
                         "instance " + sop_uid + " lacks a study UID; refused", rs.version);
            return dimse::status::cannot_understand;
        }

        audit.append(audit_category::received, study_uid,
                     "sop=" + sop_uid + " source=" + source.name, rs.version);

        registry.with_record(study_uid, [&](study_record& record) {
            record.accession = file.dataset.get_string_or(tags::accession_number,
                                                          record.accession);
            record.source_ae = source.calling_ae.value();
            auto outcome = apply_event(record, study_event::instance_received, stamp());
            if (!outcome.legal) {
                audit.append(audit_category::error, study_uid,
                             "instance_received in state " +
                                 std::string(study_state_name(record.state)),
                             rs.version);
            }
            record.instances_received++;
            record.last_instance_at = std::chrono::steady_clock::now();
            return 0;
        });

        rules::dataset_attributes attrs(file.dataset);
        auto decision = rules::evaluate_instance(rs, attrs, source);

        audit.append(audit_category::decision, study_uid,
                     "sop=" + sop_uid + " rules=[" + join(decision.matched_rules) + "] dests=[" +
                         join(decision.destinations) + "] mode=" +
                         (decision.mode == rules::route_mode::parallel ? "parallel" : "serial") +
                         (decision.blocked ? " blocked" : ""),
                     decision.ruleset_version);

        if (decision.blocked) {
            // Accept-and-drop: refusing would trigger modality resend storms.
            audit.append(audit_category::blocked, study_uid,
                         "sop=" + sop_uid + " reason=" + decision.reason,
                         decision.ruleset_version);
            return dimse::status::success;
        }

        if (decision.priority) {
            registry.with_record(study_uid, [&](study_record& record) {
                record.priority = decision.priority;
                return 0;
            });
        }

        dicom::dicom_file outbound = file;
        if (!decision.morphs.empty()) {
            std::vector<std::string> warnings;
            auto morphed = rules::apply_morphs(file.dataset, decision.morphs, &warnings);
            outbound.dataset = std::move(morphed);
            std::string detail = "sop=" + sop_uid + " ops=" +
                                 std::to_string(decision.morphs.size());
            for (const auto& w : warnings) detail += " warning=" + w;
            audit.append(audit_category::morphed, study_uid, detail, decision.ruleset_version);
        }

        if (!decision.destinations.empty()) {
            bool to_ai = false;
            for (const auto& d : decision.destinations) {
                for (const auto& ai : config.ai_dests) {
                    if (d == ai) to_ai = true;
                }
            }
            if (to_ai) {
                registry.with_record(study_uid, [&](study_record& record) {
                    record.ai_routed = true;
                    return 0;
                });
            }
            forwarder->enqueue(outbound, study_uid, decision.destinations, decision.mode);
        }
        return dimse::status::success;
    }

    // --- deliveries --------------------------------------------------------

    void on_delivery(const delivery_report& report) {
        registry.with_record(report.study_uid, [&](study_record& record) {
            auto& stats = record.deliveries[report.destination];
            stats.retries += static_cast<uint64_t>(report.retries);
            if (report.delivered) {
                stats.delivered++;
            } else {
                stats.dead_lettered++;
            }
            return 0;
        });
        if (report.delivered) {
            audit.append(audit_category::forwarded, report.study_uid,
                         "sop=" + report.sop_instance_uid + " dest=" + report.destination +
                             " retries=" + std::to_string(report.retries),
                         version());
        } else {
            audit.append(audit_category::error, report.study_uid,
                         "delivery to " + report.destination + " failed: " + report.failure +
                             " (sop=" + report.sop_instance_uid + ", dead-lettered)",
                         version());
        }

        std::lock_guard<std::mutex> lock(fanout_mutex);
        auto it = fanout.find(report.sop_instance_uid);
        if (it != fanout.end()) {
            if (!report.delivered) it->second.all_delivered = false;
            if (--it->second.remaining <= 0) fanout_cv.notify_all();
        }
    }

    // Enqueues to the viewer destinations and returns once those deliveries
    // finished; true when all succeeded.
    bool forward_to_viewers_and_wait(const dicom::dicom_file& file,
                                     const std::string& study_uid) {
        if (config.viewer_dests.empty()) return true;
        std::string sop_uid = file.sop_instance_uid();
        {
            std::lock_guard<std::mutex> lock(fanout_mutex);
            fanout[sop_uid] = {static_cast<int>(config.viewer_dests.size()), true};
        }
        forwarder->enqueue(file, study_uid, config.viewer_dests, rules::route_mode::parallel);
        std::unique_lock<std::mutex> lock(fanout_mutex);
        fanout_cv.wait(lock, [&] { return fanout[sop_uid].remaining <= 0 || stopping_flag(); });
        bool ok = fanout[sop_uid].all_delivered;
        fanout.erase(sop_uid);
        return ok;
    }

    bool stopping_flag() {
        std::lock_guard<std::mutex> lock(lifecycle_mutex);
        return stopping;
    }

    // --- AI results ---------------------------------------------------------

    uint16_t handle_ai_result(const rules::rule_set& rs, const rules::source_def& source,
                              dicom::dicom_file&& file) {
        std::string sop_class = file.sop_class_uid();
        std::string sop_uid = file.sop_instance_uid();
        std::string study_uid = file.dataset.get_string_or(tags::study_instance_uid, "");
        std::string accession = file.dataset.get_string_or(tags::accession_number, "");

        // Correlate: study UID primary, accession fallback.
        std::optional<std::string> record_uid;
        if (!study_uid.empty() && registry.find(study_uid)) {
            record_uid = study_uid;
        } else if (auto by_acc = registry.find_uid_by_accession(accession)) {
            record_uid = by_acc;
        }
        if (!record_uid) {
            quarantine(file, sop_uid);
            audit.append(audit_category::error, study_uid,
                         "ai result " + sop_uid + " matches no study (accession=" + accession +
                             "); quarantined",
                         rs.version);
            return dimse::status::success;
        }

        bool is_sr = dicom::uids::is_sr_sop_class(sop_class);
        audit.append(audit_category::ai_result, *record_uid,
                     std::string("sop=") + sop_uid + " class=" + sop_class +
                         (is_sr ? " kind=SR" : " kind=passthrough") + " source=" + source.name,
                     rs.version);

        registry.with_record(*record_uid, [&](study_record& record) {
            auto outcome = apply_event(record, study_event::ai_result_received, stamp());
            if (!outcome.legal) {
                audit.append(audit_category::error, *record_uid,
                             "ai_result_received in state " +
                                 std::string(study_state_name(record.state)),
                             rs.version);
            }
            return 0;
        });

        // Viewer fan-out and (for SRs) HL7 conversion continue off the
        // association thread so the C-STORE response is not held hostage to
        // retries.
        auto shared_file = std::make_shared<dicom::dicom_file>(std::move(file));
        std::string uid_copy = *record_uid;
        spawn_hl7_worker([this, shared_file, uid_copy, is_sr] {
            bool viewers_ok = forward_to_viewers_and_wait(*shared_file, uid_copy);
            if (viewers_ok) {
                registry.with_record(uid_copy, [&](study_record& record) {
                    apply_event(record, study_event::results_distributed, stamp());
                    return 0;
                });
            }
            if (is_sr) convert_and_send_hl7(*shared_file, uid_copy);
        });
        return dimse::status::success;
    }

    void quarantine(const dicom::dicom_file& file, const std::string& sop_uid) {
        try {
            fs::create_directories(config.quarantine_dir);
            dicom::write_part10_file(
                (fs::path(config.quarantine_dir) / (sop_uid + ".dcm")).string(), file);
        } catch (const std::exception&) {
            // quarantining is best effort
        }
    }

    void spawn_hl7_worker(std::function<void()> work) {
        hl7_outstanding.fetch_add(1);
        std::lock_guard<std::mutex> lock(hl7_mutex);
        hl7_threads.emplace_back([this, work = std::move(work)] {
            work();
            if (hl7_outstanding.fetch_sub(1) == 1) lifecycle_cv.notify_all();
        });
    }

    void convert_and_send_hl7(const dicom::dicom_file& sr_file, const std::string& study_uid) {
        sr::extraction_result extracted;
        try {
            auto tree = sr::parse_sr_tree(sr_file);
            extracted = sr::extract_fields(tree, config.mapping, sr_file.dataset);
        } catch (const std::exception& e) {
            audit.append(audit_category::error, study_uid,
                         std::string("SR parse/extract failed: ") + e.what(), version());
            return;
        }
        for (const auto& w : extracted.warnings) {
            audit.append(audit_category::error, study_uid, "extract: " + w, version());
        }

        // Priority gate: HL7 goes out only at or above the configured level.
        rules::priority_level extracted_priority = rules::priority_level::low;
        for (const auto& [id, value] : extracted.fields) {
            if (id == "AI_PRIORITY") {
                if (auto p = rules::priority_from_name(value)) extracted_priority = *p;
            }
        }
        if (static_cast<int>(extracted_priority) <
            static_cast<int>(config.hl7_priority_threshold)) {
            audit.append(audit_category::ai_result, study_uid,
                         std::string("priority ") + rules::priority_name(extracted_priority) +
                             " below threshold " +
                             rules::priority_name(config.hl7_priority_threshold) +
                             "; HL7 suppressed",
                         version());
            return;
        }

        const auto& ctx = extracted.context;
        std::string suffix = ctx.evaluation_type.empty() ? "" : "_" + ctx.evaluation_type;

        hl7::orm_context orm;
        orm.sending_app = config.hl7_sending_app;
        orm.receiving_app = config.hl7_receiving_app;
        orm.timestamp = wall_clock->timestamp();
        orm.control_id = uid_gen->next_guid();
        orm.patient = {ctx.patient_id, "MC", ctx.patient_family, ctx.patient_given,
                       ctx.patient_birth_date};
        orm.order = {ctx.accession,
                     ctx.study_code,
                     ctx.study_description,
                     sr_file.sop_instance_uid(),
                     ctx.study_short_description,
                     ctx.study_date,
                     wall_clock->timestamp()};
        for (const auto& [id, value] : extracted.fields) {
            orm.obx_rows.emplace_back(id + suffix, value);
        }

        hl7::hl7_message msg;
        try {
            msg = hl7::build_orm_o01(orm, config.hl7_strict_layout);
        } catch (const std::exception& e) {
            audit.append(audit_category::error, study_uid,
                         std::string("ORM build failed: ") + e.what(), version());
            return;
        }

        int backoff = config.retry_backoff_ms;
        std::string failure;
        for (int attempt = 1; attempt <= std::max(1, config.retry_max); ++attempt) {
            try {
                auto disposition = hl7::mllp_send(config.hl7_host, config.hl7_port, msg);
                if (disposition == hl7::ack_disposition::aa) {
                    registry.with_record(study_uid, [&](study_record& record) {
                        apply_event(record, study_event::hl7_sent, stamp());
                        return 0;
                    });
                    audit.append(audit_category::hl7_sent, study_uid,
                                 "control_id=" + orm.control_id + " obx=" +
                                     std::to_string(orm.obx_rows.size()) + " attempts=" +
                                     std::to_string(attempt),
                                 version());
                    return;
                }
                failure = std::string("ack ") + hl7::ack_name(disposition);
            } catch (const std::exception& e) {
                failure = e.what();
            }
            if (attempt < std::max(1, config.retry_max)) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= std::max(1, config.retry_multiplier);
            }
        }

        // Exhausted: dead-letter the HL7 bytes and fail the study.
        try {
            fs::create_directories(config.dead_letter_dir);
            std::ofstream out(fs::path(config.dead_letter_dir) /
                                  (study_uid + ".orm.hl7"),
                              std::ios::binary);
            auto bytes = hl7::encode_message(msg);
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
        } catch (const std::exception&) {
        }
        registry.with_record(study_uid, [&](study_record& record) {
            apply_event(record, study_event::failure, stamp());
            return 0;
        });
        audit.append(audit_category::error, study_uid, "HL7 send failed: " + failure, version());
    }

    // --- timers --------------------------------------------------------------

    void timer_loop() {
        while (true) {
            {
                std::unique_lock<std::mutex> lock(lifecycle_mutex);
                lifecycle_cv.wait_for(lock, std::chrono::milliseconds(50),
                                      [&] { return stopping; });
                if (stopping) return;
            }
            auto now = std::chrono::steady_clock::now();
            for (const auto& snapshot : registry.snapshot()) {
                if (snapshot.state == study_state::receiving &&
                    snapshot.instances_received > 0 &&
                    now - snapshot.last_instance_at >
                        std::chrono::milliseconds(config.study_inactivity_ms)) {
                    registry.with_record(snapshot.study_uid, [&](study_record& record) {
                        auto outcome = apply_event(record, study_event::study_complete, stamp());
                        if (outcome.changed && record.ai_routed) {
                            apply_event(record, study_event::ai_routed, stamp());
                        }
                        return 0;
                    });
                }
                if (snapshot.state == study_state::ai_pending &&
                    now - snapshot.ai_pending_since > std::chrono::seconds(config.ai_timeout_s)) {
                    registry.with_record(snapshot.study_uid, [&](study_record& record) {
                        auto outcome = apply_event(record, study_event::ai_timeout, stamp());
                        if (outcome.changed) {
                            audit.append(audit_category::error, record.study_uid,
                                         "ai-result timeout after " +
                                             std::to_string(config.ai_timeout_s) + "s",
                                         version());
                        }
                        return 0;
                    });
                }
            }
        }
    }

    // --- admin channel ---------------------------------------------------------

    void admin_loop() {
        while (true) {
            auto accepted = admin_listener.accept();
            if (!accepted) return;
            std::string line;
            char c;
            try {
                accepted->set_receive_timeout(std::chrono::milliseconds(2000));
                while (line.size() < 512) {
                    if (!accepted->recv_exact(std::span<uint8_t>(
                            reinterpret_cast<uint8_t*>(&c), 1))) {
                        break;
                    }
                    if (c == '\n') break;
                    if (c != '\r') line.push_back(c);
                }
                std::string reply = handle_admin(line);
                accepted->send_all(util::to_bytes(reply));
            } catch (const std::exception&) {
                // drop the connection; admin channel is best effort
            }
        }
    }

    std::string handle_admin(const std::string& line) {
        std::istringstream in(line);
        std::string verb;
        in >> verb;
        if (verb == "PING") return "OK PONG\n";
        if (verb == "VERSION") return "OK " + std::to_string(version()) + "\n";
        if (verb == "RELOAD") {
            try {
                auto next = load_rules_for_reload(config, version() + 1);
                rules_holder.swap(std::move(next));
                return "OK " + std::to_string(version()) + "\n";
            } catch (const std::exception& e) {
                return std::string("ERR ") + e.what() + "\n";
            }
        }
        if (verb == "STATE") {
            std::string uid;
            in >> uid;
            auto record = registry.find(uid);
            if (!record) return "ERR unknown study\n";
            return std::string("OK ") + study_state_name(record->state) + "\n";
        }
        return "ERR unknown command\n";
    }
};

gateway_service::gateway_service(gateway_config config)
    : impl_(std::make_shared<impl>(std::move(config))) {
    auto& cfg = impl_->config;

    dispatch_options opts;
    opts.retry_max = cfg.retry_max;
    opts.retry_backoff_ms = cfg.retry_backoff_ms;
    opts.retry_multiplier = cfg.retry_multiplier;
    opts.dead_letter_dir = cfg.dead_letter_dir;
    opts.default_calling_ae = cfg.ae_title;
    impl_->forwarder = std::make_unique<dispatcher>(
        opts,
        [impl = impl_.get()](const std::string& name) -> std::optional<rules::destination_def> {
            const auto* def = impl->rules_holder.current()->find_destination(name);
            if (def == nullptr) return std::nullopt;
            return *def;
        },
        [impl = impl_.get()](const delivery_report& report) { impl->on_delivery(report); });

    dimse::scp_listen_config listen;
    listen.port = cfg.listen_port;
    listen.policy.served_ae_titles = {cfg.ae_title};
    impl_->scp = std::make_unique<dimse::store_scp>(
        listen, [impl = impl_.get()](const dimse::scp_context& ctx, dicom::dicom_file&& file) {
            return impl->handle_store(ctx, std::move(file));
        });

    impl_->admin_listener = util::tcp_listener::bind(cfg.admin_port);
    impl_->admin_thread = std::thread([impl = impl_.get()] { impl->admin_loop(); });
    impl_->timer_thread = std::thread([impl = impl_.get()] { impl->timer_loop(); });
}

gateway_service::~gateway_service() { stop(); }

uint16_t gateway_service::dicom_port() const { return impl_->scp->port(); }

uint16_t gateway_service::admin_port() const { return impl_->admin_listener.port(); }

const std::string& gateway_service::audit_path() const { return impl_->config.audit_file; }

uint64_t gateway_service::reload_rules() {
    auto next = load_rules_for_reload(impl_->config, impl_->version() + 1);
    impl_->rules_holder.swap(std::move(next));
    return impl_->version();
}

uint64_t gateway_service::rules_version() const { return impl_->version(); }

std::optional<study_record> gateway_service::study(const std::string& study_uid) const {
    return impl_->registry.find(study_uid);
}

void gateway_service::drain() {
    impl_->forwarder->wait_idle();
    while (impl_->hl7_outstanding.load() > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    impl_->forwarder->wait_idle();
}

void gateway_service::stop() {
    if (!impl_) return;
    {
        std::lock_guard<std::mutex> lock(impl_->lifecycle_mutex);
        if (impl_->stopping) return;
        impl_->stopping = true;
    }
    impl_->lifecycle_cv.notify_all();
    impl_->fanout_cv.notify_all();
    if (impl_->scp) impl_->scp->stop();
    impl_->admin_listener.close();
    if (impl_->admin_thread.joinable()) impl_->admin_thread.join();
    if (impl_->timer_thread.joinable()) impl_->timer_thread.join();
    {
        std::vector<std::thread> workers;
        {
            std::lock_guard<std::mutex> lock(impl_->hl7_mutex);
            workers.swap(impl_->hl7_threads);
        }
        for (auto& t : workers) {
            if (t.joinable()) t.join();
        }
    }
    if (impl_->forwarder) impl_->forwarder->stop();
}

std::string admin_request(const std::string& host, uint16_t port, const std::string& command) {
    auto sock = util::tcp_socket::connect(host, port);
    sock.set_receive_timeout(std::chrono::milliseconds(5000));
    sock.send_all(util::to_bytes(command + "\n"));
    std::string reply;
    char c;
    while (reply.size() < 4096) {
        if (!sock.recv_exact(std::span<uint8_t>(reinterpret_cast<uint8_t*>(&c), 1))) break;
        if (c == '\n') break;
        reply.push_back(c);
    }
    return reply;
}

}  // namespace flowgate::gateway
