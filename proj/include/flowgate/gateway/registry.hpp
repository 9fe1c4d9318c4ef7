#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "flowgate/rules/types.hpp"

namespace flowgate::gateway {

enum class study_state {
    receiving,
    forwarded,
    ai_pending,
    ai_complete,
    results_distributed,
    hl7_sent,
    failed,
};

const char* study_state_name(study_state s);

enum class study_event {
    instance_received,
    study_complete,  // inactivity window elapsed
    ai_routed,
    ai_result_received,
    results_distributed,
    hl7_sent,
    ai_timeout,
    failure,
};

const char* study_event_name(study_event e);

struct delivery_stats {
    uint64_t delivered = 0;
    uint64_t retries = 0;
    uint64_t dead_lettered = 0;
};

struct study_record {
    std::string study_uid;
    std::string accession;
    std::string source_ae;
    study_state state = study_state::receiving;
    bool ai_routed = false;  // an ai-receiver destination was among targets
    uint64_t instances_received = 0;
    std::optional<rules::priority_level> priority;
    std::map<std::string, delivery_stats> deliveries;          // per destination
    std::vector<std::pair<study_state, std::string>> history;  // (state, timestamp)
    std::chrono::steady_clock::time_point last_instance_at {};
    std::chrono::steady_clock::time_point ai_pending_since {};
};

struct transition_outcome {
    bool changed = false;
    bool legal = true;
    study_state state = study_state::receiving;
};

// Pure transition over the allowed edges:
//   RECEIVING -> FORWARDED -> AI_PENDING -> AI_COMPLETE
//     -> RESULTS_DISTRIBUTED -> HL7_SENT, plus any -> FAILED.
// Illegal events leave the record unchanged (legal=false) so the caller can
// audit them; repeated AI results after AI_COMPLETE are tolerated no-ops.
transition_outcome apply_event(study_record& record, study_event event,
                               const std::string& timestamp);

// Per-study records behind one mutex; mutations are serialized per study.
class study_registry {
public:
    // Runs fn with the (possibly new) record locked.
    template <typename Fn>
    auto with_record(const std::string& study_uid, Fn&& fn) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto& record = records_[study_uid];
        if (record.study_uid.empty()) record.study_uid = study_uid;
        return fn(record);
    }

    std::optional<study_record> find(const std::string& study_uid) const;
    std::optional<std::string> find_uid_by_accession(const std::string& accession) const;
    std::vector<study_record> snapshot() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, study_record> records_;
};

}  // namespace flowgate::gateway
