#pragma once

#include <chrono>
#include <functional>
#include <memory>

#include "flowgate/dicom/part10.hpp"
#include "flowgate/dimse/dimse.hpp"

namespace flowgate::dimse {

// Per-store metadata handed to the handler alongside the object.
struct scp_context {
    ae_title calling;
    ae_title called;
    std::string peer_address;
    std::string transfer_syntax;
};

// Returns the DIMSE status for the C-STORE-RSP. Must be safe for concurrent
// invocation; a throwing handler yields status 0xC000 and the service
// survives.
using store_handler = std::function<uint16_t(const scp_context&, dicom::dicom_file&&)>;

struct scp_listen_config {
    uint16_t port = 0;  // 0 picks a free port
    scp_config policy;
    std::chrono::milliseconds idle_timeout {60000};
};

// Storage SCP serving concurrent associations, one thread each; strict
// request/response alternation within an association. Also answers C-ECHO.
class store_scp {
public:
    store_scp(const scp_listen_config& config, store_handler handler);
    ~store_scp();

    store_scp(const store_scp&) = delete;
    store_scp& operator=(const store_scp&) = delete;

    uint16_t port() const;
    void stop();

private:
    struct impl;
    std::shared_ptr<impl> impl_;
};

}  // namespace flowgate::dimse
