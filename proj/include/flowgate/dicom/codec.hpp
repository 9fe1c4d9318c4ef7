#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "flowgate/dicom/dataset.hpp"
#include "flowgate/util/bytes.hpp"

namespace flowgate::dicom {

// Bare-dataset codec for Implicit/Explicit VR Little Endian.
//
// Parsing is a tolerant reader: unknown tags in implicit VR become UN,
// undefined-length sequences are accepted, duplicate tags keep the last
// occurrence (with a warning). Serialization is canonical: ascending tags,
// even-length values, explicit sequence lengths — equal datasets always
// produce identical bytes.
data_set parse_dataset(std::span<const uint8_t> bytes, std::string_view transfer_syntax,
                       std::vector<std::string>* warnings = nullptr);

util::byte_buffer serialize_dataset(const data_set& ds, std::string_view transfer_syntax);

}  // namespace flowgate::dicom
