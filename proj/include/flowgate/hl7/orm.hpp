#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flowgate/hl7/message.hpp"

namespace flowgate::hl7 {

struct orm_patient {
    std::string id;
    std::string assigning = "MC";
    std::string family;
    std::string given;
    std::string birth_date;
};

struct orm_order {
    std::string accession;
    std::string study_code;
    std::string study_description;
    std::string image_id;
    std::string short_description;
    std::string study_date;
    std::string transaction_datetime;
};

struct orm_context {
    std::string sending_app;
    std::string receiving_app;
    std::string timestamp;  // YYYYMMDDHHMMSS
    std::string control_id;
    std::string processing_id = "T";
    std::string version = "2.5.1";
    orm_patient patient;
    orm_order order;
    std::vector<std::pair<std::string, std::string>> obx_rows;  // (identifier, value)
};

// ORM^O01 priority message: MSH, PID, ORC, OBR, one OBX per row (set id
// 1..n, value type ST).
//
// The default layout is figure-faithful: it reproduces the published sample
// positionally (receiving application at MSH-4, timestamp at MSH-6, message
// type at MSH-8, transaction datetime at ORC-6). strict_layout emits
// standard v2.5.1 positions instead (MSH-5/MSH-7/MSH-9, ORC-9).
//
// Throws errc::invariant_violation (empty control id, no OBX rows).
hl7_message build_orm_o01(const orm_context& ctx, bool strict_layout = false);

}  // namespace flowgate::hl7
