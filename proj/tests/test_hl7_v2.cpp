#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <thread>

#include "flowgate/error.hpp"
#include "flowgate/hl7/codec.hpp"
#include "flowgate/hl7/mllp.hpp"
#include "flowgate/hl7/orm.hpp"

using namespace flowgate;
using namespace flowgate::hl7;

namespace {

// ORM context from the published sample message.
orm_context sample_ctx() {
    orm_context ctx;
    ctx.sending_app = "MONAI_TEST";
    ctx.receiving_app = "HIS_TEST";
    ctx.timestamp = "20240101120000";
    ctx.control_id = "GUID-1";
    ctx.processing_id = "T";
    ctx.version = "2.5.1";
    ctx.patient = {"12345", "MC", "DOE", "JANE", "19700101"};
    ctx.order = {"ACC001", "XR1", "XRAY CHEST", "IMAGEID", "CHEST", "20240101",
                 "20240101120005"};
    ctx.obx_rows = {{"AI_PRIORITY_MONAI", "HIGH"}, {"AI_DETECTION_MONAI", "POS"}};
    return ctx;
}

const std::string kGoldenFigure =
    "MSH|^~\\&|MONAI_TEST|HIS_TEST||20240101120000||ORM^O01|GUID-1|T|2.5.1\r"
    "PID|||12345^^^MC^MC||DOE^JANE||19700101\r"
    "ORC|XO|||||20240101120005\r"
    "OBR|1||ACC001|XR1^XRAY CHEST^IMAGEID^^CHEST|||20240101|||||20240101\r"
    "OBX|1|ST|AI_PRIORITY_MONAI||HIGH\r"
    "OBX|2|ST|AI_DETECTION_MONAI||POS";

const std::string kGoldenStrict =
    "MSH|^~\\&|MONAI_TEST||HIS_TEST||20240101120000||ORM^O01|GUID-1|T|2.5.1\r"
    "PID|||12345^^^MC^MC||DOE^JANE||19700101\r"
    "ORC|XO||||||||20240101120005\r"
    "OBR|1||ACC001|XR1^XRAY CHEST^IMAGEID^^CHEST|||20240101|||||20240101\r"
    "OBX|1|ST|AI_PRIORITY_MONAI||HIGH\r"
    "OBX|2|ST|AI_DETECTION_MONAI||POS";

std::string to_text(const util::byte_buffer& b) { return std::string(b.begin(), b.end()); }

hl7_message make_ack(const std::string& code) {
    hl7_message ack;
    auto& msh = ack.add_segment("MSH");
    msh.set(1, "|");
    msh.set(2, "^~\\&");
    msh.set(3, "SINK");
    msh.set_components(8, {"ACK", "O01"});
    msh.set(9, "ACK-1");
    auto& msa = ack.add_segment("MSA");
    msa.set(1, code);
    msa.set(2, "GUID-1");
    return ack;
}

}  // namespace

TEST_CASE("delimiter escaping matches the v2.5.1 escape table") {
    delimiters d;
    CHECK(escape_value("A|B", d) == "A\\F\\B");
    CHECK(escape_value("A^B", d) == "A\\S\\B");
    CHECK(escape_value("A&B", d) == "A\\T\\B");
    CHECK(escape_value("A~B", d) == "A\\R\\B");
    CHECK(escape_value("A\\B", d) == "A\\E\\B");
    CHECK(unescape_value("A\\E\\B", d) == "A\\B");
    CHECK(unescape_value("A\\F\\B", d) == "A|B");
    // unknown escapes pass through
    CHECK(unescape_value("A\\X\\B", d) == "A\\X\\B");
}

TEST_CASE("escape totality over printable strings") {
    delimiters d;
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<int> ch(32, 126);
    for (int i = 0; i < 500; ++i) {
        std::string value;
        int n = len(rng);
        for (int j = 0; j < n; ++j) value.push_back(static_cast<char>(ch(rng)));
        CHECK(unescape_value(escape_value(value, d), d) == value);
    }
}

TEST_CASE("message round trip incl. values containing delimiters") {
    auto msg = build_orm_o01(sample_ctx());
    auto& obx = msg.add_segment("OBX");
    obx.set(1, "3");
    obx.set(2, "ST");
    obx.set(3, "AI_NOTE_MONAI");
    obx.set(5, "left|right^up~down\\slash&amp");

    auto bytes = encode_message(msg);
    auto back = parse_message(bytes);
    CHECK(back == msg);
    CHECK(encode_message(back) == bytes);
}

TEST_CASE("parse rejects non-HL7 and bad delimiters") {
    std::string pid = "PID|||12345";
    try {
        parse_message(util::to_bytes(pid));
        FAIL("expected NotHl7");
    } catch (const error& e) {
        CHECK(e.kind() == errc::not_hl7);
    }
    std::string dup = "MSH|^^\\&|APP";  // component == repetition
    try {
        parse_message(util::to_bytes(dup));
        FAIL("expected BadDelimiters");
    } catch (const error& e) {
        CHECK(e.kind() == errc::bad_delimiters);
    }
}

TEST_CASE("golden bytes parse and the message type reads ORM^O01") {
    auto msg = parse_message(util::to_bytes(kGoldenFigure));
    const segment* msh = msg.find("MSH");
    REQUIRE(msh != nullptr);
    CHECK(msh->text(8) == "ORM^O01");  // figure-faithful position
    CHECK(msg.find("PID")->text(5) == "DOE^JANE");

    // encode∘parse is the identity on golden bytes
    CHECK(to_text(encode_message(msg)) == kGoldenFigure);

    auto strict = parse_message(util::to_bytes(kGoldenStrict));
    CHECK(strict.find("MSH")->text(9) == "ORM^O01");  // standard position
}

TEST_CASE("LF and CRLF terminators are tolerated on input") {
    std::string lf = kGoldenFigure;
    for (auto& c : lf) {
        if (c == '\r') c = '\n';
    }
    CHECK(parse_message(util::to_bytes(lf)) == parse_message(util::to_bytes(kGoldenFigure)));

    std::string crlf;
    for (char c : kGoldenFigure) {
        crlf.push_back(c);
        if (c == '\r') crlf.push_back('\n');
    }
    CHECK(parse_message(util::to_bytes(crlf)) == parse_message(util::to_bytes(kGoldenFigure)));
}

TEST_CASE("ORM builder reproduces the sample message byte for byte") {
    auto figure = encode_message(build_orm_o01(sample_ctx()));
    CHECK(to_text(figure) == kGoldenFigure);

    auto strict = encode_message(build_orm_o01(sample_ctx(), /*strict_layout=*/true));
    CHECK(to_text(strict) == kGoldenStrict);

    // determinism
    CHECK(encode_message(build_orm_o01(sample_ctx())) == figure);
}

TEST_CASE("ORM builder enforces context invariants") {
    auto ctx = sample_ctx();
    ctx.obx_rows.clear();
    CHECK_THROWS_AS(build_orm_o01(ctx), error);

    ctx = sample_ctx();
    ctx.control_id.clear();
    CHECK_THROWS_AS(build_orm_o01(ctx), error);
}

TEST_CASE("MLLP framing") {
    util::byte_buffer payload = {'M', 'S', 'H'};
    auto framed = mllp_frame(payload);
    CHECK(framed.size() == payload.size() + 3);
    CHECK(framed.front() == 0x0B);
    CHECK(mllp_unframe(framed) == payload);

    auto empty = mllp_frame({});
    REQUIRE(empty.size() == 3);
    CHECK(empty[0] == 0x0B);
    CHECK(empty[1] == 0x1C);
    CHECK(empty[2] == 0x0D);

    framed.pop_back();
    try {
        mllp_unframe(framed);
        FAIL("expected BadFrame");
    } catch (const error& e) {
        CHECK(e.kind() == errc::bad_frame);
    }
}

TEST_CASE("mllp_send observes scripted ACK dispositions") {
    // Minimal scripted interface engine: reply with a fixed ACK, or stay
    // silent when the code is empty.
    auto serve_one = [](util::tcp_listener& listener, const std::string& code) {
        auto sock = listener.accept();
        if (!sock) return;
        auto frame = read_mllp_frame(*sock);
        if (!frame) return;
        if (code.empty()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(400));
            return;
        }
        sock->send_all(mllp_frame(encode_message(make_ack(code))));
    };

    auto msg = build_orm_o01(sample_ctx());

    {
        auto listener = util::tcp_listener::bind(0);
        std::thread t(serve_one, std::ref(listener), "AA");
        CHECK(mllp_send("127.0.0.1", listener.port(), msg) == ack_disposition::aa);
        t.join();
    }
    {
        auto listener = util::tcp_listener::bind(0);
        std::thread t(serve_one, std::ref(listener), "AE");
        CHECK(mllp_send("127.0.0.1", listener.port(), msg) == ack_disposition::ae);
        t.join();
    }
    {
        auto listener = util::tcp_listener::bind(0);
        std::thread t(serve_one, std::ref(listener), "");
        CHECK(mllp_send("127.0.0.1", listener.port(), msg, std::chrono::milliseconds(150)) ==
              ack_disposition::timed_out);
        t.join();
    }
    {
        util::tcp_listener probe = util::tcp_listener::bind(0);
        uint16_t dead = probe.port();
        probe.close();
        CHECK_THROWS_AS(mllp_send("127.0.0.1", dead, msg), error);
    }
}
