#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "flowgate/dimse/scp.hpp"
#include "flowgate/util/bytes.hpp"

namespace flowgate::sim {

// Scripted per-store behavior: "delay=300 fail_first=2 status=A700".
struct sink_behavior {
    int delay_ms = 0;
    int fail_first = 0;
    uint16_t fail_status = 0xA700;
};

sink_behavior parse_behavior(const std::string& script);

struct sink_record {
    std::string sop_instance_uid;
    size_t byte_length = 0;
    std::string digest;
    std::string timestamp;
    std::string calling_ae;
};

// PACS/viewer stand-in: stores received objects keyed by SOP instance UID
// (a retry replaces the file, never duplicates it) and appends one manifest
// line per stored version.
class store_sink {
public:
    store_sink(uint16_t port, const std::string& ae_title,
               const std::filesystem::path& out_dir, sink_behavior behavior = {});

    uint16_t port() const;
    const std::filesystem::path& directory() const { return out_dir_; }
    std::filesystem::path manifest_path() const { return out_dir_ / "manifest.txt"; }
    std::vector<sink_record> manifest() const;
    size_t store_count() const { return stores_.load(); }

    void stop();

private:
    std::filesystem::path out_dir_;
    sink_behavior behavior_;
    std::atomic<size_t> stores_ {0};
    std::shared_ptr<std::mutex> manifest_mutex_ = std::make_shared<std::mutex>();
    std::unique_ptr<dimse::store_scp> scp_;
};

enum class mllp_ack_mode { aa, ae, none };

// Interface-engine stand-in: stores each framed message and replies per the
// ack mode.
class mllp_sink {
public:
    mllp_sink(uint16_t port, mllp_ack_mode mode, const std::filesystem::path& out_dir);
    ~mllp_sink();

    uint16_t port() const;
    size_t message_count() const;
    std::vector<util::byte_buffer> messages() const;

    void stop();

private:
    struct state;
    std::shared_ptr<state> state_;
};

}  // namespace flowgate::sim
