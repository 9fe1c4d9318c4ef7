#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace flowgate::gateway {

enum class audit_category {
    received,
    decision,
    forwarded,
    blocked,
    morphed,
    ai_result,
    hl7_sent,
    error,
};

const char* audit_category_name(audit_category c);
std::optional<audit_category> audit_category_from_name(std::string_view s);

struct audit_event {
    uint64_t sequence = 0;
    std::string timestamp;  // YYYYMMDDHHMMSS
    std::string study_uid;
    audit_category category = audit_category::error;
    uint64_t ruleset_version = 0;
    std::string detail;
};

struct audit_filter {
    std::optional<std::string> study_uid;
    std::optional<audit_category> category;
    std::optional<uint64_t> sequence_from;
    std::optional<uint64_t> sequence_to;  // inclusive

    bool matches(const audit_event& e) const;
};

// Append-only line log, one writer channel shared by all gateway workers.
// Reopening an existing file continues the sequence, so the trail survives
// restarts.
class audit_log {
public:
    explicit audit_log(std::string path);

    uint64_t append(audit_category category, const std::string& study_uid,
                    const std::string& detail, uint64_t ruleset_version);

    const std::string& path() const noexcept { return path_; }

    std::vector<audit_event> query(const audit_filter& filter) const;

    static std::vector<audit_event> read_file(const std::string& path);
    static std::vector<audit_event> query_file(const std::string& path,
                                               const audit_filter& filter);

private:
    std::string path_;
    mutable std::mutex mutex_;
    uint64_t next_sequence_ = 1;
};

}  // namespace flowgate::gateway
