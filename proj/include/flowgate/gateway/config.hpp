#pragma once

#include <string>
#include <vector>

#include "flowgate/rules/types.hpp"
#include "flowgate/sr/mapping.hpp"

namespace flowgate::gateway {

// Gateway service configuration: the routing rules grammar plus one
// [gateway] section. Relative paths resolve against the config file's
// directory.
struct gateway_config {
    uint16_t listen_port = 0;  // 0 picks a free port
    dimse::ae_title ae_title;
    uint16_t admin_port = 0;  // reload/status channel; 0 picks a free port
    bool allow_unknown_sources = false;

    std::vector<std::string> viewer_dests;
    std::vector<std::string> ai_dests;

    std::string hl7_host = "127.0.0.1";
    uint16_t hl7_port = 0;
    bool hl7_strict_layout = false;
    rules::priority_level hl7_priority_threshold = rules::priority_level::high;
    std::string hl7_sending_app = "FLOWGATE";
    std::string hl7_receiving_app = "HIS";

    std::string template_path;
    sr::mapping_template mapping;

    int retry_max = 3;
    int retry_backoff_ms = 500;
    int retry_multiplier = 2;
    int ai_timeout_s = 300;
    int study_inactivity_ms = 5000;

    std::string quarantine_dir = "quarantine";
    std::string dead_letter_dir = "dead_letter";
    std::string audit_file = "audit.log";

    rules::rule_set routing;        // version stamped by the loader
    std::string rules_path;         // file the rules came from (reload source)
    std::string config_path;

    const rules::destination_def* destination(const std::string& name) const {
        return routing.find_destination(name);
    }
};

// Throws errc::config_invalid (parse problems keep their line/column in the
// message) and validates cross-references (viewer/ai destination names,
// mapping template readability).
gateway_config load_gateway_config(const std::string& path);

// Re-reads only the routing sections (for the reload command).
rules::rule_set load_rules_for_reload(const gateway_config& config, uint64_t new_version);

}  // namespace flowgate::gateway
