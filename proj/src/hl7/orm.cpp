#include "flowgate/hl7/orm.hpp"

#include "flowgate/error.hpp"

namespace flowgate::hl7 {

hl7_message build_orm_o01(const orm_context& ctx, bool strict_layout) {
    if (ctx.control_id.empty()) {
        raise(errc::invariant_violation, "message control id must not be empty");
    }
    if (ctx.obx_rows.empty()) {
        raise(errc::invariant_violation, "priority messages need at least one OBX row");
    }

    hl7_message msg;
    auto& msh = msg.add_segment("MSH");
    msh.set(1, std::string(1, msg.delims.field));
    msh.set(2, "^~\\&");
    if (strict_layout) {
        msh.set(3, ctx.sending_app);
        msh.set(5, ctx.receiving_app);
        msh.set(7, ctx.timestamp);
        msh.set_components(9, {"ORM", "O01"});
        msh.set(10, ctx.control_id);
        msh.set(11, ctx.processing_id);
        msh.set(12, ctx.version);
    } else {
        msh.set(3, ctx.sending_app);
        msh.set(4, ctx.receiving_app);
        msh.set(6, ctx.timestamp);
        msh.set_components(8, {"ORM", "O01"});
        msh.set(9, ctx.control_id);
        msh.set(10, ctx.processing_id);
        msh.set(11, ctx.version);
    }

    auto& pid = msg.add_segment("PID");
    pid.set_components(3, {ctx.patient.id, "", "", ctx.patient.assigning, ctx.patient.assigning});
    pid.set_components(5, {ctx.patient.family, ctx.patient.given});
    pid.set(7, ctx.patient.birth_date);

    auto& orc = msg.add_segment("ORC");
    orc.set(1, "XO");
    orc.set(strict_layout ? 9 : 6, ctx.order.transaction_datetime);

    auto& obr = msg.add_segment("OBR");
    obr.set(1, "1");
    obr.set(3, ctx.order.accession);
    obr.set_components(4, {ctx.order.study_code, ctx.order.study_description, ctx.order.image_id,
                           "", ctx.order.short_description});
    obr.set(7, ctx.order.study_date);
    obr.set(12, ctx.order.study_date);

    int set_id = 1;
    for (const auto& [identifier, value] : ctx.obx_rows) {
        auto& obx = msg.add_segment("OBX");
        obx.set(1, std::to_string(set_id++));
        obx.set(2, "ST");
        obx.set(3, identifier);
        obx.set(5, value);
    }
    return msg;
}

}  // namespace flowgate::hl7
