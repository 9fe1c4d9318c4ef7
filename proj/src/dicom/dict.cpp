#include "flowgate/dicom/dict.hpp"

#include <map>

#include "flowgate/dicom/tag.hpp"

namespace flowgate::dicom {

namespace {

const std::map<tag, vr>& table() {
    using namespace tags;
    static const std::map<tag, vr> t = {
        {command_group_length, vr::UL},
        {affected_sop_class_uid, vr::UI},
        {command_field, vr::US},
        {message_id, vr::US},
        {message_id_responded_to, vr::US},
        {command_data_set_type, vr::US},
        {status, vr::US},
        {affected_sop_instance_uid, vr::UI},
        {file_meta_group_length, vr::UL},
        {file_meta_version, vr::OB},
        {media_sop_class_uid, vr::UI},
        {media_sop_instance_uid, vr::UI},
        {transfer_syntax_uid, vr::UI},
        {implementation_class_uid, vr::UI},
        {implementation_version_name, vr::SH},
        {sop_class_uid, vr::UI},
        {sop_instance_uid, vr::UI},
        {study_date, vr::DA},
        {series_date, vr::DA},
        {content_date, vr::DA},
        {study_time, vr::TM},
        {content_time, vr::TM},
        {accession_number, vr::SH},
        {modality, vr::CS},
        {manufacturer, vr::LO},
        {institution_name, vr::LO},
        {code_value, vr::SH},
        {coding_scheme_designator, vr::SH},
        {code_meaning, vr::LO},
        {study_description, vr::LO},
        {series_description, vr::LO},
        {patient_name, vr::PN},
        {patient_id, vr::LO},
        {patient_birth_date, vr::DA},
        {patient_sex, vr::CS},
        {slice_thickness, vr::DS},
        {study_instance_uid, vr::UI},
        {series_instance_uid, vr::UI},
        {study_id, vr::SH},
        {series_number, vr::IS},
        {instance_number, vr::IS},
        {image_position_patient, vr::DS},
        {image_orientation_patient, vr::DS},
        {samples_per_pixel, vr::US},
        {photometric_interpretation, vr::CS},
        {rows, vr::US},
        {columns, vr::US},
        {pixel_spacing, vr::DS},
        {bits_allocated, vr::US},
        {bits_stored, vr::US},
        {high_bit, vr::US},
        {pixel_representation, vr::US},
        {measurement_units_code_seq, vr::SQ},
        {relationship_type, vr::CS},
        {value_type, vr::CS},
        {concept_name_code_seq, vr::SQ},
        {continuity_of_content, vr::CS},
        // (0040,A160) is UT in the standard; LT is the in-house stand-in
        // since UT is outside the supported VR set. Values stay well below
        // the LT length cap.
        {text_value, vr::LT},
        {concept_code_seq, vr::SQ},
        {measured_value_seq, vr::SQ},
        {numeric_value, vr::DS},
        {content_seq, vr::SQ},
        // (0070,0022) is FL in the standard; coordinates are carried as
        // decimal strings here for the same VR-subset reason.
        {graphic_data, vr::DS},
        {graphic_type, vr::CS},
        {pixel_data, vr::OW},
    };
    return t;
}

}  // namespace

vr dict_vr(tag t) {
    const auto& tbl = table();
    auto it = tbl.find(t);
    if (it != tbl.end()) return it->second;
    return vr::UN;
}

}  // namespace flowgate::dicom
