#pragma once

#include <string>
#include <vector>

#include "flowgate/dicom/dataset.hpp"
#include "flowgate/util/bytes.hpp"

namespace flowgate::dicom {

// A DICOM Part 10 file: 128-byte zero preamble, "DICM", group-0002 file meta
// (always Explicit VR LE), then the dataset in the declared transfer syntax.
struct dicom_file {
    data_set file_meta;
    data_set dataset;
    std::string transfer_syntax;

    std::string sop_class_uid() const;
    std::string sop_instance_uid() const;

    bool operator==(const dicom_file&) const = default;

    // Builds the file meta group from the dataset's SOP class/instance UIDs.
    // Throws errc::invariant_violation when either is missing.
    static dicom_file wrap(data_set dataset, std::string transfer_syntax);
};

// Group-0002 dataset for the given identifiers (used directly by the SCP,
// which learns them from the command set and negotiation, not the dataset).
data_set make_file_meta(const std::string& sop_class, const std::string& sop_instance,
                        const std::string& transfer_syntax);

dicom_file parse_part10(std::span<const uint8_t> bytes,
                        std::vector<std::string>* warnings = nullptr);

util::byte_buffer serialize_part10(const dicom_file& file);

// Convenience file I/O; read throws the parse errors, write throws
// errc::write_failed.
dicom_file read_part10_file(const std::string& path, std::vector<std::string>* warnings = nullptr);
void write_part10_file(const std::string& path, const dicom_file& file);

}  // namespace flowgate::dicom
