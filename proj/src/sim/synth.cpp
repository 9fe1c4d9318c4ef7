#include "flowgate/sim/synth.hpp"

#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/error.hpp"
#include "flowgate/util/strings.hpp"
#include "flowgate/util/uid.hpp"

namespace flowgate::sim {

namespace tags = dicom::tags;
using dicom::vr;

std::string synthetic_study_uid(const synthetic_study_spec& spec) {
    return std::string(util::kUidRoot) + "." + std::to_string(spec.seed) + ".1";
}

std::vector<dicom::dicom_file> gen_synthetic_instances(const synthetic_study_spec& spec) {
    if (spec.series.empty()) raise(errc::invariant_violation, "study needs at least one series");

    std::string study_uid = synthetic_study_uid(spec);
    std::vector<dicom::dicom_file> out;

    for (size_t s = 0; s < spec.series.size(); ++s) {
        const auto& se = spec.series[s];
        if (se.slice_count == 0 || se.rows == 0 || se.cols == 0) {
            raise(errc::invariant_violation, "series dimensions must be positive");
        }
        std::string series_uid = std::string(util::kUidRoot) + "." + std::to_string(spec.seed) +
                                 ".2." + std::to_string(s + 1);

        for (size_t i = 0; i < se.slice_count; ++i) {
            dicom::data_set ds;
            ds.set_string(tags::sop_class_uid, vr::UI, std::string(dicom::uids::ct_image_storage));
            ds.set_string(tags::sop_instance_uid, vr::UI,
                          series_uid + "." + std::to_string(i + 1));
            ds.set_string(tags::study_date, vr::DA, spec.study_date);
            ds.set_string(tags::accession_number, vr::SH, spec.accession);
            ds.set_string(tags::modality, vr::CS, se.modality);
            ds.set_string(tags::study_description, vr::LO, spec.study_description);
            ds.set_string(tags::series_description, vr::LO, se.description);
            ds.set_string(tags::patient_name, vr::PN,
                          spec.patient_family + "^" + spec.patient_given);
            ds.set_string(tags::patient_id, vr::LO, spec.patient_id);
            ds.set_string(tags::patient_birth_date, vr::DA, spec.patient_birth_date);
            ds.set_string(tags::slice_thickness, vr::DS,
                          util::format_decimal(se.slice_thickness));
            ds.set_string(tags::study_instance_uid, vr::UI, study_uid);
            ds.set_string(tags::series_instance_uid, vr::UI, series_uid);
            ds.set_string(tags::study_id, vr::SH, spec.study_code);
            ds.set_string(tags::series_number, vr::IS, std::to_string(s + 1));
            ds.set_string(tags::instance_number, vr::IS, std::to_string(i + 1));
            ds.set_string(tags::image_position_patient, vr::DS,
                          "0\\0\\" + util::format_decimal(se.slice_thickness *
                                                          static_cast<double>(i)));
            ds.set_string(tags::image_orientation_patient, vr::DS, "1\\0\\0\\0\\1\\0");
            ds.set_u16(tags::samples_per_pixel, vr::US, 1);
            ds.set_string(tags::photometric_interpretation, vr::CS, "MONOCHROME2");
            ds.set_u16(tags::rows, vr::US, se.rows);
            ds.set_u16(tags::columns, vr::US, se.cols);
            ds.set_string(tags::pixel_spacing, vr::DS, "1\\1");
            ds.set_u16(tags::bits_allocated, vr::US, 16);
            ds.set_u16(tags::bits_stored, vr::US, 16);
            ds.set_u16(tags::high_bit, vr::US, 15);
            ds.set_u16(tags::pixel_representation, vr::US, 1);

            util::byte_buffer pixels(static_cast<size_t>(se.rows) * se.cols * 2, 0);
            if (se.block) {
                for (size_t dy = 0; dy < se.block->height; ++dy) {
                    for (size_t dx = 0; dx < se.block->width; ++dx) {
                        size_t y = se.block->y + dy;
                        size_t x = se.block->x + dx;
                        if (y >= se.rows || x >= se.cols) continue;
                        size_t at = 2 * (y * se.cols + x);
                        auto value = static_cast<uint16_t>(se.block->value);
                        pixels[at] = static_cast<uint8_t>(value & 0xFF);
                        pixels[at + 1] = static_cast<uint8_t>(value >> 8);
                    }
                }
            }
            ds.set_bytes(tags::pixel_data, vr::OW, std::move(pixels));

            out.push_back(dicom::dicom_file::wrap(std::move(ds),
                                                  std::string(dicom::uids::explicit_vr_le)));
        }
    }
    return out;
}

std::vector<std::filesystem::path> gen_synthetic_study(const synthetic_study_spec& spec,
                                                       const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    auto files = gen_synthetic_instances(spec);
    std::vector<std::filesystem::path> paths;
    size_t index = 0;
    for (size_t s = 0; s < spec.series.size(); ++s) {
        for (size_t i = 0; i < spec.series[s].slice_count; ++i, ++index) {
            auto path = out_dir / ("s" + std::to_string(s + 1) + "_i" + std::to_string(i + 1) +
                                   ".dcm");
            dicom::write_part10_file(path.string(), files[index]);
            paths.push_back(path);
        }
    }
    return paths;
}

}  // namespace flowgate::sim
