#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flowgate/dicom/part10.hpp"

namespace flowgate::sim {

// Rectangle of bright voxels stamped into every slice of a series.
struct bright_block {
    size_t x = 0;
    size_t y = 0;
    size_t width = 1;
    size_t height = 1;
    int16_t value = 1000;
};

struct series_spec {
    size_t slice_count = 3;
    uint16_t rows = 10;
    uint16_t cols = 10;
    double slice_thickness = 3.0;
    std::string modality = "CT";
    std::string description = "AXIAL";
    std::optional<bright_block> block;
};

// Same seed, same spec -> byte-identical files (UIDs derive from the seed
// and all dates come from the spec).
struct synthetic_study_spec {
    uint64_t seed = 42;
    std::vector<series_spec> series {series_spec {}};
    std::string study_description = "XRAY CHEST";
    std::string short_description = "CHEST";
    std::string study_code = "XR1";
    std::string study_date = "20240101";
    std::string accession = "ACC001";
    std::string patient_id = "12345";
    std::string patient_family = "DOE";
    std::string patient_given = "JANE";
    std::string patient_birth_date = "19700101";
};

std::string synthetic_study_uid(const synthetic_study_spec& spec);

// In-memory form (series-major, slice order).
std::vector<dicom::dicom_file> gen_synthetic_instances(const synthetic_study_spec& spec);

// Writes Part 10 files named s<series>_i<instance>.dcm; returns the paths.
std::vector<std::filesystem::path> gen_synthetic_study(const synthetic_study_spec& spec,
                                                       const std::filesystem::path& out_dir);

}  // namespace flowgate::sim
