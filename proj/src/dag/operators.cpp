#include "flowgate/dag/operators.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>

#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/part10.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/error.hpp"
#include "flowgate/rules/engine.hpp"
#include "flowgate/sr/sr.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::dag {

namespace fs = std::filesystem;
namespace tags = dicom::tags;
using dicom::vr;

std::vector<study> op_study_loader(const fs::path& input_dir,
                                   std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& m) {
        if (warnings != nullptr) warnings->push_back(m);
    };

    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(input_dir, ec)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    if (ec) raise(errc::no_studies_found, "cannot read " + input_dir.string());
    std::sort(files.begin(), files.end());

    // study uid -> series uid -> (sort key, dataset)
    struct keyed_instance {
        long long number;
        std::string file_name;
        dicom::data_set ds;
    };
    std::map<std::string, std::map<std::string, std::vector<keyed_instance>>> grouped;

    for (const auto& path : files) {
        dicom::dicom_file f;
        try {
            f = dicom::read_part10_file(path.string());
        } catch (const std::exception& e) {
            warn("skipping " + path.filename().string() + ": " + e.what());
            continue;
        }
        auto study_uid = f.dataset.get_string_or(tags::study_instance_uid, "");
        auto series_uid = f.dataset.get_string_or(tags::series_instance_uid, "");
        if (study_uid.empty() || series_uid.empty()) {
            warn("skipping " + path.filename().string() + ": missing study/series UID");
            continue;
        }
        keyed_instance ki;
        ki.number = 0;
        try {
            ki.number = f.dataset.get_integer(tags::instance_number).value_or(LLONG_MAX);
        } catch (const error&) {
            ki.number = LLONG_MAX;
        }
        ki.file_name = path.filename().string();
        ki.ds = std::move(f.dataset);
        grouped[study_uid][series_uid].push_back(std::move(ki));
    }

    if (grouped.empty()) raise(errc::no_studies_found, "no DICOM studies in " + input_dir.string());

    std::vector<study> out;
    for (auto& [study_uid, series_map] : grouped) {
        study s;
        s.study_uid = study_uid;
        for (auto& [series_uid, instances] : series_map) {
            std::stable_sort(instances.begin(), instances.end(),
                             [](const keyed_instance& a, const keyed_instance& b) {
                                 if (a.number != b.number) return a.number < b.number;
                                 return a.file_name < b.file_name;
                             });
            series se;
            se.series_uid = series_uid;
            const auto& first = instances.front().ds;
            se.modality = first.get_string_or(tags::modality, "");
            se.description = first.get_string_or(tags::series_description, "");
            try {
                se.slice_thickness = first.get_decimal(tags::slice_thickness);
            } catch (const error&) {
                se.slice_thickness.reset();
            }
            for (auto& ki : instances) se.instances.push_back(std::move(ki.ds));
            s.series_list.push_back(std::move(se));
        }
        const auto& first = s.series_list.front().instances.front();
        s.accession = first.get_string_or(tags::accession_number, "");
        for (dicom::tag t : {tags::patient_name, tags::patient_id, tags::patient_birth_date,
                             tags::study_date, tags::study_description, tags::series_description,
                             tags::accession_number, tags::study_id, tags::study_instance_uid}) {
            if (const auto* e = first.find(t)) s.attributes.set(*e);
        }
        out.push_back(std::move(s));
    }
    return out;
}

series op_series_selector(const study& s, const rules::match_expr& criteria) {
    rules::source_def no_source;
    for (const auto& se : s.series_list) {  // series_list is sorted by UID
        rules::map_attributes attrs;
        if (!se.modality.empty()) attrs.set("modality", se.modality);
        if (!se.description.empty()) attrs.set("series_description", se.description);
        if (se.slice_thickness) {
            attrs.set("slice_thickness", util::format_decimal(*se.slice_thickness));
        }
        if (rules::evaluate_expr(criteria, attrs, no_source)) return se;
    }
    raise(errc::no_matching_series, "no series in study " + s.study_uid + " matches");
}

namespace {

struct slice_geometry {
    bool has_position = false;
    double projection = 0;
    long long instance_number = 0;
    std::string sop_uid;
    const dicom::data_set* ds = nullptr;
};

}  // namespace

volume op_series_to_volume(const series& s) {
    if (s.instances.empty()) raise(errc::empty_volume, "series has no instances");

    auto rows0 = s.instances.front().get_u16(tags::rows);
    auto cols0 = s.instances.front().get_u16(tags::columns);
    if (!rows0 || !cols0) raise(errc::inconsistent_dimensions, "first instance lacks Rows/Columns");

    // Slice normal from the first instance's orientation; identity default.
    std::vector<double> row_dir {1, 0, 0}, col_dir {0, 1, 0};
    auto orient = s.instances.front().get_strings(tags::image_orientation_patient);
    if (orient.size() == 6) {
        for (int i = 0; i < 3; ++i) {
            row_dir[i] = util::parse_decimal(orient[i]).value_or(row_dir[i]);
            col_dir[i] = util::parse_decimal(orient[i + 3]).value_or(col_dir[i]);
        }
    }
    std::vector<double> normal {row_dir[1] * col_dir[2] - row_dir[2] * col_dir[1],
                                row_dir[2] * col_dir[0] - row_dir[0] * col_dir[2],
                                row_dir[0] * col_dir[1] - row_dir[1] * col_dir[0]};

    std::vector<slice_geometry> slices;
    bool all_positions = true;
    for (const auto& inst : s.instances) {
        if (inst.get_u16(tags::rows) != rows0 || inst.get_u16(tags::columns) != cols0) {
            raise(errc::inconsistent_dimensions, "Rows/Columns differ across instances");
        }
        slice_geometry g;
        g.ds = &inst;
        g.sop_uid = inst.get_string_or(tags::sop_instance_uid, "");
        try {
            g.instance_number = inst.get_integer(tags::instance_number).value_or(0);
        } catch (const error&) {
            g.instance_number = 0;
        }
        auto ipp = inst.get_strings(tags::image_position_patient);
        if (ipp.size() == 3) {
            double p[3];
            bool ok = true;
            for (int i = 0; i < 3; ++i) {
                auto v = util::parse_decimal(ipp[i]);
                if (!v) ok = false;
                else p[i] = *v;
            }
            if (ok) {
                g.has_position = true;
                g.projection = p[0] * normal[0] + p[1] * normal[1] + p[2] * normal[2];
            }
        }
        if (!g.has_position) all_positions = false;
        slices.push_back(std::move(g));
    }

    // IPP projection order; InstanceNumber fallback when any slice lacks it.
    std::stable_sort(slices.begin(), slices.end(),
                     [&](const slice_geometry& a, const slice_geometry& b) {
                         if (all_positions && a.projection != b.projection) {
                             return a.projection < b.projection;
                         }
                         if (a.instance_number != b.instance_number) {
                             return a.instance_number < b.instance_number;
                         }
                         return a.sop_uid < b.sop_uid;
                     });

    volume v;
    v.nz = slices.size();
    v.ny = *rows0;
    v.nx = *cols0;

    if (all_positions && v.nz >= 2) {
        double total = slices.back().projection - slices.front().projection;
        double mean = total / static_cast<double>(v.nz - 1);
        if (mean <= 0) raise(errc::non_uniform_spacing, "slices share a position");
        for (size_t i = 1; i < slices.size(); ++i) {
            double gap = slices[i].projection - slices[i - 1].projection;
            if (std::abs(gap - mean) > 0.10 * mean) {
                raise(errc::non_uniform_spacing,
                      "adjacent gap " + util::format_decimal(gap) + " vs mean " +
                          util::format_decimal(mean));
            }
        }
        v.dz = mean;
    } else if (s.slice_thickness) {
        v.dz = *s.slice_thickness;
    }

    auto spacing = s.instances.front().get_strings(tags::pixel_spacing);
    if (spacing.size() == 2) {
        v.dy = util::parse_decimal(spacing[0]).value_or(1.0);
        v.dx = util::parse_decimal(spacing[1]).value_or(1.0);
    }
    auto first_ipp = slices.front().ds->get_strings(tags::image_position_patient);
    if (first_ipp.size() == 3) {
        for (int i = 0; i < 3; ++i) v.origin[i] = util::parse_decimal(first_ipp[i]).value_or(0);
    }
    if (orient.size() == 6) {
        v.orientation.reserve(6);
        for (const auto& o : orient) v.orientation.push_back(util::parse_decimal(o).value_or(0));
    }

    size_t slice_voxels = v.ny * v.nx;
    v.voxels.reserve(v.nz * slice_voxels);
    for (const auto& g : slices) {
        const auto* pixels = g.ds->find(tags::pixel_data);
        if (pixels == nullptr || pixels->value().size() != slice_voxels * 2) {
            raise(errc::inconsistent_dimensions,
                  "pixel data size mismatch in " + g.sop_uid);
        }
        const auto& raw = pixels->value();
        for (size_t i = 0; i < slice_voxels; ++i) {
            v.voxels.push_back(static_cast<int16_t>(raw[2 * i] | (raw[2 * i + 1] << 8)));
        }
    }
    return v;
}

inference_result op_stub_inference(const volume& v, int threshold, double min_fraction) {
    if (v.voxels.empty() || v.nz == 0) raise(errc::empty_volume, "volume has no voxels");

    size_t mid = v.nz / 2;
    size_t count = 0;
    int min_x = -1, min_y = -1, max_x = -1, max_y = -1;
    for (size_t y = 0; y < v.ny; ++y) {
        for (size_t x = 0; x < v.nx; ++x) {
            if (v.at(mid, y, x) < threshold) continue;
            ++count;
            if (min_x < 0 || static_cast<int>(x) < min_x) min_x = static_cast<int>(x);
            if (max_x < 0 || static_cast<int>(x) > max_x) max_x = static_cast<int>(x);
            if (min_y < 0 || static_cast<int>(y) < min_y) min_y = static_cast<int>(y);
            if (max_y < 0 || static_cast<int>(y) > max_y) max_y = static_cast<int>(y);
        }
    }

    inference_result r;
    r.fraction = static_cast<double>(count) / static_cast<double>(v.ny * v.nx);
    if (r.fraction >= min_fraction && min_fraction > 0) {
        r.detection = sr::detection_result::pos;
        r.certainty = static_cast<int>(
            std::min(10.0, std::floor(10.0 * r.fraction / min_fraction)));
        r.bbox = sr::pixel_box {min_x, min_y, max_x, max_y};
    }
    return r;
}

std::filesystem::path op_write_sr(const inference_result& result, const study& context,
                                  const fs::path& output_dir,
                                  const std::string& evaluation_type, util::uid_source& uids,
                                  util::clock_source& clock) {
    sr::finding_report report;
    bool pos = result.detection == sr::detection_result::pos;
    report.priority = pos ? rules::priority_level::high : rules::priority_level::low;
    report.detection = result.detection;
    report.certainty = result.certainty;
    if (result.bbox) {
        // Inclusive pixel indices become exclusive outer corners.
        report.bbox = sr::pixel_box {result.bbox->x0, result.bbox->y0, result.bbox->x1 + 1,
                                     result.bbox->y1 + 1};
    }
    report.evaluation_type = evaluation_type;
    report.accession = context.accession;
    report.study_uid = context.study_uid;
    const auto& attrs = context.attributes;
    auto name = attrs.get_string_or(tags::patient_name, "");
    auto caret = name.find('^');
    report.patient_family = caret == std::string::npos ? name : name.substr(0, caret);
    report.patient_given = caret == std::string::npos ? "" : name.substr(caret + 1);
    report.patient_id = attrs.get_string_or(tags::patient_id, "");
    report.patient_birth_date = attrs.get_string_or(tags::patient_birth_date, "");
    report.study_date = attrs.get_string_or(tags::study_date, "");
    report.study_code = attrs.get_string_or(tags::study_id, "");
    report.study_description = attrs.get_string_or(tags::study_description, "");
    report.study_short_description = attrs.get_string_or(tags::series_description, "");

    auto file = sr::build_tid1500_sr(report, uids, clock);
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    auto path = output_dir / (file.sop_instance_uid() + ".dcm");
    dicom::write_part10_file(path.string(), file);
    return path;
}

std::filesystem::path op_write_sc(const inference_result& result, const volume& v,
                                  const study& context, const fs::path& output_dir,
                                  util::uid_source& uids, util::clock_source& clock) {
    if (v.voxels.empty()) raise(errc::empty_volume, "volume has no voxels");
    size_t mid = v.nz / 2;

    // Window the mid slice into 8 bits.
    int16_t lo = v.at(mid, 0, 0), hi = lo;
    for (size_t y = 0; y < v.ny; ++y) {
        for (size_t x = 0; x < v.nx; ++x) {
            lo = std::min(lo, v.at(mid, y, x));
            hi = std::max(hi, v.at(mid, y, x));
        }
    }
    double range = hi > lo ? static_cast<double>(hi - lo) : 1.0;
    util::byte_buffer pixels(v.ny * v.nx);
    for (size_t y = 0; y < v.ny; ++y) {
        for (size_t x = 0; x < v.nx; ++x) {
            pixels[y * v.nx + x] =
                static_cast<uint8_t>(255.0 * (v.at(mid, y, x) - lo) / range);
        }
    }
    if (result.bbox) {
        // 1-pixel frame on the inclusive box.
        auto clamp_x = [&](int x) { return std::clamp<int>(x, 0, static_cast<int>(v.nx) - 1); };
        auto clamp_y = [&](int y) { return std::clamp<int>(y, 0, static_cast<int>(v.ny) - 1); };
        int x0 = clamp_x(result.bbox->x0), x1 = clamp_x(result.bbox->x1);
        int y0 = clamp_y(result.bbox->y0), y1 = clamp_y(result.bbox->y1);
        for (int x = x0; x <= x1; ++x) {
            pixels[static_cast<size_t>(y0) * v.nx + x] = 255;
            pixels[static_cast<size_t>(y1) * v.nx + x] = 255;
        }
        for (int y = y0; y <= y1; ++y) {
            pixels[static_cast<size_t>(y) * v.nx + result.bbox->x0] = 255;
            pixels[static_cast<size_t>(y) * v.nx + result.bbox->x1] = 255;
        }
    }

    std::string timestamp = clock.timestamp();
    dicom::data_set ds;
    ds.set_string(tags::sop_class_uid, vr::UI,
                  std::string(dicom::uids::secondary_capture_storage));
    ds.set_string(tags::sop_instance_uid, vr::UI, uids.next_uid());
    ds.set_string(tags::modality, vr::CS, "OT");
    ds.set_string(tags::content_date, vr::DA, timestamp.substr(0, 8));
    ds.set_string(tags::content_time, vr::TM, timestamp.substr(8));
    for (const auto& e : context.attributes) ds.set(e);
    ds.set_string(tags::series_instance_uid, vr::UI, uids.next_uid());
    ds.set_u16(tags::samples_per_pixel, vr::US, 1);
    ds.set_string(tags::photometric_interpretation, vr::CS, "MONOCHROME2");
    ds.set_u16(tags::rows, vr::US, static_cast<uint16_t>(v.ny));
    ds.set_u16(tags::columns, vr::US, static_cast<uint16_t>(v.nx));
    ds.set_u16(tags::bits_allocated, vr::US, 8);
    ds.set_u16(tags::bits_stored, vr::US, 8);
    ds.set_u16(tags::high_bit, vr::US, 7);
    ds.set_u16(tags::pixel_representation, vr::US, 0);
    ds.set_bytes(tags::pixel_data, vr::OB, std::move(pixels));

    auto file = dicom::dicom_file::wrap(std::move(ds), std::string(dicom::uids::explicit_vr_le));
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    auto path = output_dir / (file.sop_instance_uid() + ".dcm");
    dicom::write_part10_file(path.string(), file);
    return path;
}

}  // namespace flowgate::dag
