#include "flowgate/error.hpp"

namespace flowgate {

const char* errc_name(errc kind) {
    switch (kind) {
        case errc::missing_magic: return "MissingMagic";
        case errc::unsupported_transfer_syntax: return "UnsupportedTransferSyntax";
        case errc::truncated_element: return "TruncatedElement";
        case errc::invariant_violation: return "InvariantViolation";
        case errc::type_mismatch: return "TypeMismatch";
        case errc::oversized_pdu: return "OversizedPdu";
        case errc::unknown_pdu_type: return "UnknownPduType";
        case errc::length_mismatch: return "LengthMismatch";
        case errc::connection_refused: return "ConnectionRefused";
        case errc::association_rejected: return "AssociationRejected";
        case errc::peer_abort: return "PeerAbort";
        case errc::protocol_error: return "ProtocolError";
        case errc::bind_failed: return "BindFailed";
        case errc::timeout: return "Timeout";
        case errc::syntax_error: return "SyntaxError";
        case errc::unresolved_reference: return "UnresolvedReference";
        case errc::duplicate_name: return "DuplicateName";
        case errc::stale_version: return "StaleVersion";
        case errc::not_an_sr: return "NotAnSr";
        case errc::malformed_content_sequence: return "MalformedContentSequence";
        case errc::duplicate_target: return "DuplicateTarget";
        case errc::not_hl7: return "NotHl7";
        case errc::bad_delimiters: return "BadDelimiters";
        case errc::bad_frame: return "BadFrame";
        case errc::cycle_detected: return "CycleDetected";
        case errc::dangling_input: return "DanglingInput";
        case errc::port_type_mismatch: return "PortTypeMismatch";
        case errc::operator_failed: return "OperatorFailed";
        case errc::no_studies_found: return "NoStudiesFound";
        case errc::no_matching_series: return "NoMatchingSeries";
        case errc::inconsistent_dimensions: return "InconsistentDimensions";
        case errc::non_uniform_spacing: return "NonUniformSpacing";
        case errc::empty_volume: return "EmptyVolume";
        case errc::write_failed: return "WriteFailed";
        case errc::config_invalid: return "ConfigInvalid";
    }
    return "UnknownError";
}

}  // namespace flowgate
