#include "flowgate/dicom/vr.hpp"

namespace flowgate::dicom {

std::optional<vr> vr_from_code(std::string_view code) {
    if (code.size() != 2) return std::nullopt;
    static constexpr vr all[] = {
        vr::AE, vr::CS, vr::DA, vr::DS, vr::DT, vr::IS, vr::LO, vr::LT, vr::OB, vr::OW,
        vr::PN, vr::SH, vr::SL, vr::SQ, vr::ST, vr::TM, vr::UI, vr::UL, vr::US, vr::UN,
    };
    for (vr v : all) {
        if (code == vr_code(v)) return v;
    }
    return std::nullopt;
}

}  // namespace flowgate::dicom
