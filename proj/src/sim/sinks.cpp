#include "flowgate/sim/sinks.hpp"

#include <fstream>
#include <mutex>
#include <thread>

#include "flowgate/dicom/part10.hpp"
#include "flowgate/error.hpp"
#include "flowgate/hl7/codec.hpp"
#include "flowgate/hl7/mllp.hpp"
#include "flowgate/util/clock.hpp"
#include "flowgate/util/fnv.hpp"
#include "flowgate/util/net.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::sim {

namespace fs = std::filesystem;

sink_behavior parse_behavior(const std::string& script) {
    sink_behavior b;
    for (const auto& part : util::split(script, ' ')) {
        auto kv = util::trim(part);
        if (kv.empty()) continue;
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            raise(errc::syntax_error, "behavior entries are key=value: '" + kv + "'");
        }
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        if (key == "delay") {
            b.delay_ms = static_cast<int>(util::parse_integer(value).value_or(0));
        } else if (key == "fail_first") {
            b.fail_first = static_cast<int>(util::parse_integer(value).value_or(0));
        } else if (key == "status") {
            b.fail_status = static_cast<uint16_t>(strtoul(value.c_str(), nullptr, 16));
        } else {
            raise(errc::syntax_error, "unknown behavior key '" + key + "'");
        }
    }
    return b;
}

store_sink::store_sink(uint16_t port, const std::string& ae_title, const fs::path& out_dir,
                       sink_behavior behavior)
    : out_dir_(out_dir), behavior_(behavior) {
    fs::create_directories(out_dir_);

    dimse::scp_listen_config cfg;
    cfg.port = port;
    cfg.policy.served_ae_titles = {dimse::ae_title::parse(ae_title)};

    auto manifest_mutex = manifest_mutex_;
    auto dir = out_dir_;
    auto manifest_file = manifest_path();
    auto* stores = &stores_;
    auto b = behavior_;

    scp_ = std::make_unique<dimse::store_scp>(
        cfg, [manifest_mutex, dir, manifest_file, stores, b](
                 const dimse::scp_context& ctx, dicom::dicom_file&& file) -> uint16_t {
            size_t n = stores->fetch_add(1);
            if (b.delay_ms > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(b.delay_ms));
            }
            if (static_cast<int>(n) < b.fail_first) {
                return b.fail_status;
            }
            auto bytes = dicom::serialize_part10(file);
            std::string sop_uid = file.sop_instance_uid();
            // keyed by SOP instance UID: a redelivery replaces the object
            std::ofstream out(dir / (sop_uid + ".dcm"), std::ios::binary | std::ios::trunc);
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
            if (!out) return dimse::status::cannot_understand;

            util::system_clock_source clock;
            std::lock_guard<std::mutex> lock(*manifest_mutex);
            std::ofstream manifest(manifest_file, std::ios::app);
            manifest << sop_uid << '|' << bytes.size() << '|' << util::fnv1a64_hex(bytes) << '|'
                     << clock.timestamp() << '|' << ctx.calling.value() << '\n';
            return dimse::status::success;
        });
}

uint16_t store_sink::port() const { return scp_->port(); }

std::vector<sink_record> store_sink::manifest() const {
    std::vector<sink_record> out;
    std::lock_guard<std::mutex> lock(*manifest_mutex_);
    std::ifstream in(manifest_path());
    std::string line;
    while (std::getline(in, line)) {
        auto parts = util::split(line, '|');
        if (parts.size() != 5) continue;
        sink_record r;
        r.sop_instance_uid = parts[0];
        r.byte_length = static_cast<size_t>(util::parse_integer(parts[1]).value_or(0));
        r.digest = parts[2];
        r.timestamp = parts[3];
        r.calling_ae = parts[4];
        out.push_back(std::move(r));
    }
    return out;
}

void store_sink::stop() {
    if (scp_) scp_->stop();
}

struct mllp_sink::state {
    util::tcp_listener listener;
    mllp_ack_mode mode = mllp_ack_mode::aa;
    fs::path out_dir;
    std::thread accept_thread;
    std::mutex mutex;
    std::vector<std::thread> connection_threads;
    std::atomic<size_t> count {0};
    std::atomic<bool> stopping {false};

    void serve(std::shared_ptr<util::tcp_socket> sock) {
        try {
            while (!stopping.load()) {
                auto frame = hl7::read_mllp_frame(*sock);
                if (!frame) return;
                auto payload = hl7::mllp_unframe(*frame);
                size_t n = count.fetch_add(1);
                {
                    std::lock_guard<std::mutex> lock(mutex);
                    std::ofstream out(out_dir / ("msg_" + std::to_string(n + 1) + ".hl7"),
                                      std::ios::binary);
                    out.write(reinterpret_cast<const char*>(payload.data()),
                              static_cast<std::streamsize>(payload.size()));
                }
                if (mode == mllp_ack_mode::none) continue;  // stay silent

                hl7::hl7_message ack;
                auto& msh = ack.add_segment("MSH");
                msh.set(1, "|");
                msh.set(2, "^~\\&");
                msh.set(3, "MLLP_SINK");
                msh.set_components(8, {"ACK", "O01"});
                msh.set(9, "ACK-" + std::to_string(n + 1));
                auto& msa = ack.add_segment("MSA");
                msa.set(1, mode == mllp_ack_mode::aa ? "AA" : "AE");
                sock->send_all(hl7::mllp_frame(hl7::encode_message(ack)));
            }
        } catch (const std::exception&) {
            // connection torn down; nothing to clean
        }
    }

    void run() {
        while (!stopping.load()) {
            auto accepted = listener.accept();
            if (!accepted) return;
            auto sock = std::make_shared<util::tcp_socket>(std::move(*accepted));
            std::lock_guard<std::mutex> lock(mutex);
            connection_threads.emplace_back([this, sock] { serve(sock); });
        }
    }

    void shut_down() {
        if (stopping.exchange(true)) return;
        listener.close();
        if (accept_thread.joinable()) accept_thread.join();
        std::vector<std::thread> threads;
        {
            std::lock_guard<std::mutex> lock(mutex);
            threads.swap(connection_threads);
        }
        for (auto& t : threads) {
            if (t.joinable()) t.join();
        }
    }
};

mllp_sink::mllp_sink(uint16_t port, mllp_ack_mode mode, const fs::path& out_dir)
    : state_(std::make_shared<state>()) {
    fs::create_directories(out_dir);
    state_->mode = mode;
    state_->out_dir = out_dir;
    state_->listener = util::tcp_listener::bind(port);
    state_->accept_thread = std::thread([s = state_.get()] { s->run(); });
}

mllp_sink::~mllp_sink() {
    if (state_) state_->shut_down();
}

uint16_t mllp_sink::port() const { return state_->listener.port(); }

size_t mllp_sink::message_count() const { return state_->count.load(); }

std::vector<util::byte_buffer> mllp_sink::messages() const {
    std::vector<util::byte_buffer> out;
    size_t n = state_->count.load();
    for (size_t i = 1; i <= n; ++i) {
        std::ifstream in(state_->out_dir / ("msg_" + std::to_string(i) + ".hl7"),
                         std::ios::binary);
        if (!in) continue;
        out.emplace_back((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    return out;
}

void mllp_sink::stop() { state_->shut_down(); }

}  // namespace flowgate::sim
