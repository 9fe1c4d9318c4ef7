#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace flowgate::dicom {

// Supported value representations. OB/OW/SQ/UN use the 4-byte length form in
// Explicit VR; all others the 2-byte form.
enum class vr : uint8_t {
    AE, CS, DA, DS, DT, IS, LO, LT, OB, OW, PN, SH, SL, SQ, ST, TM, UI, UL, US, UN,
};

constexpr const char* vr_code(vr v) {
    switch (v) {
        case vr::AE: return "AE";
        case vr::CS: return "CS";
        case vr::DA: return "DA";
        case vr::DS: return "DS";
        case vr::DT: return "DT";
        case vr::IS: return "IS";
        case vr::LO: return "LO";
        case vr::LT: return "LT";
        case vr::OB: return "OB";
        case vr::OW: return "OW";
        case vr::PN: return "PN";
        case vr::SH: return "SH";
        case vr::SL: return "SL";
        case vr::SQ: return "SQ";
        case vr::ST: return "ST";
        case vr::TM: return "TM";
        case vr::UI: return "UI";
        case vr::UL: return "UL";
        case vr::US: return "US";
        case vr::UN: return "UN";
    }
    return "UN";
}

std::optional<vr> vr_from_code(std::string_view code);

// 4-byte length form in Explicit VR (with 2 reserved bytes after the VR code).
constexpr bool vr_uses_long_length(vr v) {
    return v == vr::OB || v == vr::OW || v == vr::SQ || v == vr::UN;
}

// Text VRs pad to even length with a trailing space; UI and the binary VRs
// pad with NUL.
constexpr bool vr_pads_with_null(vr v) {
    return v == vr::UI || v == vr::OB || v == vr::OW || v == vr::UN;
}

constexpr bool vr_is_string(vr v) {
    switch (v) {
        case vr::AE: case vr::CS: case vr::DA: case vr::DS: case vr::DT:
        case vr::IS: case vr::LO: case vr::LT: case vr::PN: case vr::SH:
        case vr::ST: case vr::TM: case vr::UI:
            return true;
        default:
            return false;
    }
}

}  // namespace flowgate::dicom
