#pragma once

#include "flowgate/dicom/tag.hpp"
#include "flowgate/dicom/vr.hpp"

namespace flowgate::dicom {

// VR lookup for every tag this gateway touches; anything else is UN.
vr dict_vr(tag t);

// Tags used throughout the codebase.
namespace tags {
// DIMSE command set (group 0000)
inline constexpr tag command_group_length {0x0000, 0x0000};
inline constexpr tag affected_sop_class_uid {0x0000, 0x0002};
inline constexpr tag command_field {0x0000, 0x0100};
inline constexpr tag message_id {0x0000, 0x0110};
inline constexpr tag message_id_responded_to {0x0000, 0x0120};
inline constexpr tag command_data_set_type {0x0000, 0x0800};
inline constexpr tag status {0x0000, 0x0900};
inline constexpr tag affected_sop_instance_uid {0x0000, 0x1000};
// File meta (group 0002)
inline constexpr tag file_meta_group_length {0x0002, 0x0000};
inline constexpr tag file_meta_version {0x0002, 0x0001};
inline constexpr tag media_sop_class_uid {0x0002, 0x0002};
inline constexpr tag media_sop_instance_uid {0x0002, 0x0003};
inline constexpr tag transfer_syntax_uid {0x0002, 0x0010};
inline constexpr tag implementation_class_uid {0x0002, 0x0012};
inline constexpr tag implementation_version_name {0x0002, 0x0013};
// Composite object attributes
inline constexpr tag sop_class_uid {0x0008, 0x0016};
inline constexpr tag sop_instance_uid {0x0008, 0x0018};
inline constexpr tag study_date {0x0008, 0x0020};
inline constexpr tag series_date {0x0008, 0x0021};
inline constexpr tag content_date {0x0008, 0x0023};
inline constexpr tag study_time {0x0008, 0x0030};
inline constexpr tag content_time {0x0008, 0x0033};
inline constexpr tag accession_number {0x0008, 0x0050};
inline constexpr tag modality {0x0008, 0x0060};
inline constexpr tag manufacturer {0x0008, 0x0070};
inline constexpr tag institution_name {0x0008, 0x0080};
inline constexpr tag code_value {0x0008, 0x0100};
inline constexpr tag coding_scheme_designator {0x0008, 0x0102};
inline constexpr tag code_meaning {0x0008, 0x0104};
inline constexpr tag study_description {0x0008, 0x1030};
inline constexpr tag series_description {0x0008, 0x103E};
inline constexpr tag patient_name {0x0010, 0x0010};
inline constexpr tag patient_id {0x0010, 0x0020};
inline constexpr tag patient_birth_date {0x0010, 0x0030};
inline constexpr tag patient_sex {0x0010, 0x0040};
inline constexpr tag slice_thickness {0x0018, 0x0050};
inline constexpr tag study_instance_uid {0x0020, 0x000D};
inline constexpr tag series_instance_uid {0x0020, 0x000E};
inline constexpr tag study_id {0x0020, 0x0010};
inline constexpr tag series_number {0x0020, 0x0011};
inline constexpr tag instance_number {0x0020, 0x0013};
inline constexpr tag image_position_patient {0x0020, 0x0032};
inline constexpr tag image_orientation_patient {0x0020, 0x0037};
inline constexpr tag samples_per_pixel {0x0028, 0x0002};
inline constexpr tag photometric_interpretation {0x0028, 0x0004};
inline constexpr tag rows {0x0028, 0x0010};
inline constexpr tag columns {0x0028, 0x0011};
inline constexpr tag pixel_spacing {0x0028, 0x0030};
inline constexpr tag bits_allocated {0x0028, 0x0100};
inline constexpr tag bits_stored {0x0028, 0x0101};
inline constexpr tag high_bit {0x0028, 0x0102};
inline constexpr tag pixel_representation {0x0028, 0x0103};
// Structured report content
inline constexpr tag measurement_units_code_seq {0x0040, 0x08EA};
inline constexpr tag relationship_type {0x0040, 0xA010};
inline constexpr tag value_type {0x0040, 0xA040};
inline constexpr tag concept_name_code_seq {0x0040, 0xA043};
inline constexpr tag continuity_of_content {0x0040, 0xA050};
inline constexpr tag text_value {0x0040, 0xA160};
inline constexpr tag concept_code_seq {0x0040, 0xA168};
inline constexpr tag measured_value_seq {0x0040, 0xA300};
inline constexpr tag numeric_value {0x0040, 0xA30A};
inline constexpr tag content_seq {0x0040, 0xA730};
inline constexpr tag graphic_data {0x0070, 0x0022};
inline constexpr tag graphic_type {0x0070, 0x0023};
inline constexpr tag pixel_data {0x7FE0, 0x0010};
// Sequence structure
inline constexpr tag item {0xFFFE, 0xE000};
inline constexpr tag item_delimiter {0xFFFE, 0xE00D};
inline constexpr tag sequence_delimiter {0xFFFE, 0xE0DD};
}  // namespace tags

}  // namespace flowgate::dicom
