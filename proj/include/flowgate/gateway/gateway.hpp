#pragma once

#include <memory>

#include "flowgate/gateway/audit.hpp"
#include "flowgate/gateway/config.hpp"
#include "flowgate/gateway/registry.hpp"

namespace flowgate::gateway {

// The router service: a storage SCP feeding the rules engine and the
// per-destination dispatchers, the study lifecycle tracker, the AI-results
// pipeline (viewer fan-out + SR-to-HL7 conversion), an admin channel for
// reloads, and the audit trail.
class gateway_service {
public:
    // Binds the SCP and admin listeners and loads rules at version 1.
    // Throws errc::bind_failed / errc::config_invalid.
    explicit gateway_service(gateway_config config);
    ~gateway_service();

    gateway_service(const gateway_service&) = delete;
    gateway_service& operator=(const gateway_service&) = delete;

    uint16_t dicom_port() const;
    uint16_t admin_port() const;
    const std::string& audit_path() const;

    // Re-reads rules from the config's rules file and swaps them in with the
    // next version. Returns the new version.
    uint64_t reload_rules();
    uint64_t rules_version() const;

    std::optional<study_record> study(const std::string& study_uid) const;

    // Blocks until all queued deliveries have finished.
    void drain();

    void stop();

private:
    struct impl;
    std::shared_ptr<impl> impl_;
};

// Admin-channel client helpers (used by the reload/status CLI verbs).
std::string admin_request(const std::string& host, uint16_t port, const std::string& command);

}  // namespace flowgate::gateway
