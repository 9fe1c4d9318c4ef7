#pragma once

#include <string_view>

namespace flowgate::dicom::uids {

// Transfer syntaxes
inline constexpr std::string_view implicit_vr_le = "1.2.840.10008.1.2";
inline constexpr std::string_view explicit_vr_le = "1.2.840.10008.1.2.1";

// SOP classes
inline constexpr std::string_view ct_image_storage = "1.2.840.10008.5.1.4.1.1.2";
inline constexpr std::string_view mr_image_storage = "1.2.840.10008.5.1.4.1.1.4";
inline constexpr std::string_view cr_image_storage = "1.2.840.10008.5.1.4.1.1.1";
inline constexpr std::string_view secondary_capture_storage = "1.2.840.10008.5.1.4.1.1.7";
inline constexpr std::string_view basic_text_sr = "1.2.840.10008.5.1.4.1.1.88.11";
inline constexpr std::string_view enhanced_sr = "1.2.840.10008.5.1.4.1.1.88.22";
inline constexpr std::string_view comprehensive_sr = "1.2.840.10008.5.1.4.1.1.88.33";
inline constexpr std::string_view segmentation_storage = "1.2.840.10008.5.1.4.1.1.66.4";
inline constexpr std::string_view rt_structure_set_storage = "1.2.840.10008.5.1.4.1.1.481.3";
inline constexpr std::string_view verification = "1.2.840.10008.1.1";

// Association plumbing
inline constexpr std::string_view application_context = "1.2.840.10008.3.1.1.1";
inline constexpr std::string_view implementation_class = "1.2.826.0.1.3680043.10.1462.1";
inline constexpr std::string_view implementation_version = "FLOWGATE_01";

inline bool is_supported_transfer_syntax(std::string_view ts) {
    return ts == implicit_vr_le || ts == explicit_vr_le;
}

inline bool is_sr_sop_class(std::string_view uid) {
    return uid == basic_text_sr || uid == enhanced_sr || uid == comprehensive_sr ||
           uid == "1.2.840.10008.5.1.4.1.1.88.34";
}

}  // namespace flowgate::dicom::uids
