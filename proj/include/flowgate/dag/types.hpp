#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowgate/dicom/dataset.hpp"
#include "flowgate/rules/types.hpp"
#include "flowgate/sr/types.hpp"

namespace flowgate::dag {

enum class port_type { studies, series, volume, inference, file_path };
const char* port_type_name(port_type t);

struct port_spec {
    std::string name;
    port_type type;
};

// One operator in the application graph. Each kind has a fixed port
// signature; parameters only apply to the kinds that read them.
struct operator_spec {
    std::string name;
    std::string kind;  // study_loader | series_selector | series_to_volume |
                       // stub_inference | sr_writer | sc_writer
    std::string criteria_text;      // series_selector
    rules::match_expr criteria;     // parsed form
    int threshold = 400;            // stub_inference
    double min_fraction = 0.01;     // stub_inference
    std::string evaluation_type = "MONAI";  // sr_writer

    bool operator==(const operator_spec&) const = default;
};

bool known_operator_kind(const std::string& kind);
std::vector<port_spec> input_ports(const std::string& kind);
std::vector<port_spec> output_ports(const std::string& kind);

struct graph_edge {
    std::string from_op;
    std::string from_port;
    std::string to_op;
    std::string to_port;

    bool operator==(const graph_edge&) const = default;
};

struct app_graph {
    std::vector<operator_spec> operators;
    std::vector<graph_edge> edges;

    const operator_spec* find_operator(std::string_view name) const;

    bool operator==(const app_graph&) const = default;
};

struct series {
    std::string series_uid;
    std::string modality;
    std::string description;
    std::optional<double> slice_thickness;
    std::vector<dicom::data_set> instances;  // sorted by instance number
};

struct study {
    std::string study_uid;
    std::string accession;
    dicom::data_set attributes;  // patient/study module from the first instance
    std::vector<series> series_list;  // sorted by series UID
};

struct volume {
    size_t nz = 0, ny = 0, nx = 0;
    double dz = 1.0, dy = 1.0, dx = 1.0;
    std::vector<double> origin {0, 0, 0};       // IPP of the first slice
    std::vector<double> orientation;            // row/column cosines when present
    std::vector<int16_t> voxels;                // z-major, then rows, then columns

    int16_t at(size_t z, size_t y, size_t x) const { return voxels[(z * ny + y) * nx + x]; }
};

struct inference_result {
    sr::detection_result detection = sr::detection_result::neg;
    int certainty = 0;
    std::optional<sr::pixel_box> bbox;  // inclusive pixel indices on the mid slice
    double fraction = 0.0;              // diagnostic: bright-voxel fraction
};

}  // namespace flowgate::dag
