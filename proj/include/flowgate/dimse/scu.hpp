#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "flowgate/dicom/part10.hpp"
#include "flowgate/dimse/ae_title.hpp"

namespace flowgate::dimse {

struct store_endpoint {
    std::string host;
    uint16_t port = 0;
};

struct scu_options {
    uint32_t max_pdu_length = 16384;
    std::chrono::milliseconds response_timeout {30000};
};

struct store_result {
    std::string sop_instance_uid;
    uint16_t status = 0;

    bool ok() const noexcept { return status == 0; }
};

// Pushes the files over one association: per file a C-STORE-RQ plus the
// dataset fragmented to the peer's max PDU length, then an orderly release.
// Non-zero statuses are recorded per file without aborting the rest.
//
// Throws: errc::connection_refused, errc::association_rejected,
// errc::peer_abort, errc::protocol_error, errc::timeout.
std::vector<store_result> scu_store(const store_endpoint& endpoint, const ae_title& calling,
                                    const ae_title& called,
                                    const std::vector<dicom::dicom_file>& files,
                                    const scu_options& options = {});

}  // namespace flowgate::dimse
