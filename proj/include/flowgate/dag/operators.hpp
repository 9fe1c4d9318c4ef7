#pragma once

#include <filesystem>

#include "flowgate/dag/types.hpp"
#include "flowgate/util/clock.hpp"
#include "flowgate/util/uid.hpp"

namespace flowgate::dag {

// Parses every Part 10 file in the directory, grouped by study then series,
// instances sorted by InstanceNumber. Unparseable files are skipped with a
// warning. Throws errc::no_studies_found when nothing loads.
std::vector<study> op_study_loader(const std::filesystem::path& input_dir,
                                   std::vector<std::string>* warnings = nullptr);

// First series (by series UID order) satisfying the criteria, which may use
// modality, series_description and slice_thickness. Throws
// errc::no_matching_series.
series op_series_selector(const study& s, const rules::match_expr& criteria);

// Stacks slices ordered by the projection of ImagePositionPatient onto the
// slice normal (falls back to InstanceNumber when IPP is absent). Throws
// errc::inconsistent_dimensions / errc::non_uniform_spacing (adjacent gap
// deviating more than 10% from the mean).
volume op_series_to_volume(const series& s);

// Deterministic stand-in for model inference. On the mid-axial slice,
// r = count(voxels >= threshold) / (ny*nx); POS iff r >= min_fraction;
// certainty = min(10, floor(10*r/min_fraction)) when POS; bbox = tightest
// rectangle containing the bright voxels (inclusive indices).
inference_result op_stub_inference(const volume& v, int threshold = 400,
                                   double min_fraction = 0.01);

// Wraps the result in a structured report (POS -> HIGH priority, NEG -> LOW)
// and writes it as a Part 10 file. Returns the file path.
std::filesystem::path op_write_sr(const inference_result& result, const study& context,
                                  const std::filesystem::path& output_dir,
                                  const std::string& evaluation_type, util::uid_source& uids,
                                  util::clock_source& clock);

// Renders the mid slice as an 8-bit secondary capture with the box burned
// in as a 1-pixel frame.
std::filesystem::path op_write_sc(const inference_result& result, const volume& v,
                                  const study& context,
                                  const std::filesystem::path& output_dir,
                                  util::uid_source& uids, util::clock_source& clock);

}  // namespace flowgate::dag
