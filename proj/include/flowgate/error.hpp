#pragma once

#include <stdexcept>
#include <string>

namespace flowgate {

// Every failure the library reports carries one of these kinds so callers
// (and tests) can branch on the condition instead of matching message text.
enum class errc {
    // dicom
    missing_magic,
    unsupported_transfer_syntax,
    truncated_element,
    invariant_violation,
    type_mismatch,
    // network / pdu
    oversized_pdu,
    unknown_pdu_type,
    length_mismatch,
    connection_refused,
    association_rejected,
    peer_abort,
    protocol_error,
    bind_failed,
    timeout,
    // rules
    syntax_error,
    unresolved_reference,
    duplicate_name,
    stale_version,
    // structured reports
    not_an_sr,
    malformed_content_sequence,
    duplicate_target,
    // hl7
    not_hl7,
    bad_delimiters,
    bad_frame,
    // dag
    cycle_detected,
    dangling_input,
    port_type_mismatch,
    operator_failed,
    no_studies_found,
    no_matching_series,
    inconsistent_dimensions,
    non_uniform_spacing,
    empty_volume,
    write_failed,
    // gateway
    config_invalid,
};

const char* errc_name(errc kind);

class error : public std::runtime_error {
public:
    error(errc kind, std::string message)
        : std::runtime_error(std::string(errc_name(kind)) + ": " + message),
          kind_(kind) {}

    errc kind() const noexcept { return kind_; }

private:
    errc kind_;
};

[[noreturn]] inline void raise(errc kind, std::string message) {
    throw error(kind, std::move(message));
}

}  // namespace flowgate
