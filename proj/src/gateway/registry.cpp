#include "flowgate/gateway/registry.hpp"

namespace flowgate::gateway {

const char* study_state_name(study_state s) {
    switch (s) {
        case study_state::receiving: return "RECEIVING";
        case study_state::forwarded: return "FORWARDED";
        case study_state::ai_pending: return "AI_PENDING";
        case study_state::ai_complete: return "AI_COMPLETE";
        case study_state::results_distributed: return "RESULTS_DISTRIBUTED";
        case study_state::hl7_sent: return "HL7_SENT";
        case study_state::failed: return "FAILED";
    }
    return "?";
}

const char* study_event_name(study_event e) {
    switch (e) {
        case study_event::instance_received: return "instance_received";
        case study_event::study_complete: return "study_complete";
        case study_event::ai_routed: return "ai_routed";
        case study_event::ai_result_received: return "ai_result_received";
        case study_event::results_distributed: return "results_distributed";
        case study_event::hl7_sent: return "hl7_sent";
        case study_event::ai_timeout: return "ai_timeout";
        case study_event::failure: return "failure";
    }
    return "?";
}

namespace {

std::optional<study_state> next_state(study_state current, study_event event, bool& noop) {
    noop = false;
    switch (event) {
        case study_event::instance_received:
            if (current == study_state::receiving) {
                noop = true;
                return current;
            }
            return std::nullopt;
        case study_event::study_complete:
            if (current == study_state::receiving) return study_state::forwarded;
            return std::nullopt;
        case study_event::ai_routed:
            if (current == study_state::forwarded) return study_state::ai_pending;
            return std::nullopt;
        case study_event::ai_result_received:
            if (current == study_state::ai_pending) return study_state::ai_complete;
            if (current == study_state::ai_complete ||
                current == study_state::results_distributed ||
                current == study_state::hl7_sent) {
                noop = true;  // later results for the same study are fine
                return current;
            }
            return std::nullopt;
        case study_event::results_distributed:
            if (current == study_state::ai_complete) return study_state::results_distributed;
            if (current == study_state::results_distributed ||
                current == study_state::hl7_sent) {
                noop = true;
                return current;
            }
            return std::nullopt;
        case study_event::hl7_sent:
            if (current == study_state::results_distributed) return study_state::hl7_sent;
            return std::nullopt;
        case study_event::ai_timeout:
            if (current == study_state::ai_pending) return study_state::failed;
            return std::nullopt;
        case study_event::failure:
            return study_state::failed;
    }
    return std::nullopt;
}

}  // namespace

transition_outcome apply_event(study_record& record, study_event event,
                               const std::string& timestamp) {
    transition_outcome out;
    bool noop = false;
    auto next = next_state(record.state, event, noop);
    if (!next) {
        out.legal = false;
        out.state = record.state;
        return out;
    }
    out.state = *next;
    if (noop || *next == record.state) {
        return out;
    }
    record.state = *next;
    record.history.emplace_back(*next, timestamp);
    if (*next == study_state::ai_pending) {
        record.ai_pending_since = std::chrono::steady_clock::now();
    }
    out.changed = true;
    return out;
}

std::optional<study_record> study_registry::find(const std::string& study_uid) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = records_.find(study_uid);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> study_registry::find_uid_by_accession(
    const std::string& accession) const {
    if (accession.empty()) return std::nullopt;
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [uid, record] : records_) {
        if (record.accession == accession) return uid;
    }
    return std::nullopt;
}

std::vector<study_record> study_registry::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<study_record> out;
    out.reserve(records_.size());
    for (const auto& [uid, record] : records_) out.push_back(record);
    return out;
}

}  // namespace flowgate::gateway
