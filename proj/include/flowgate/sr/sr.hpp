#pragma once

#include "flowgate/dicom/part10.hpp"
#include "flowgate/sr/types.hpp"
#include "flowgate/util/clock.hpp"
#include "flowgate/util/uid.hpp"

namespace flowgate::sr {

// Comprehensive SR carrying the finding as a coded content tree: root
// CONTAINER with CODE priority, CODE detection, NUM certainty, and an
// SCOORD POLYLINE box when the detection is positive. SOP instance UID and
// content timestamps come from the supplied sources.
dicom::dicom_file build_tid1500_sr(const finding_report& report, util::uid_source& uids,
                                   util::clock_source& clock);

// Decodes the content sequence back into a tree. Unknown value types are
// preserved as opaque leaves. Throws errc::not_an_sr for non-SR SOP classes
// and errc::malformed_content_sequence on structural damage.
sr_node parse_sr_tree(const dicom::dicom_file& file);

}  // namespace flowgate::sr
