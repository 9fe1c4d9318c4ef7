#include "flowgate/gateway/audit.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>

#include "flowgate/error.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::gateway {

const char* audit_category_name(audit_category c) {
    switch (c) {
        case audit_category::received: return "received";
        case audit_category::decision: return "decision";
        case audit_category::forwarded: return "forwarded";
        case audit_category::blocked: return "blocked";
        case audit_category::morphed: return "morphed";
        case audit_category::ai_result: return "ai_result";
        case audit_category::hl7_sent: return "hl7_sent";
        case audit_category::error: return "error";
    }
    return "error";
}

std::optional<audit_category> audit_category_from_name(std::string_view s) {
    for (auto c : {audit_category::received, audit_category::decision, audit_category::forwarded,
                   audit_category::blocked, audit_category::morphed, audit_category::ai_result,
                   audit_category::hl7_sent, audit_category::error}) {
        if (s == audit_category_name(c)) return c;
    }
    return std::nullopt;
}

bool audit_filter::matches(const audit_event& e) const {
    if (study_uid && e.study_uid != *study_uid) return false;
    if (category && e.category != *category) return false;
    if (sequence_from && e.sequence < *sequence_from) return false;
    if (sequence_to && e.sequence > *sequence_to) return false;
    return true;
}

namespace {

std::string now_stamp() {
    time_t t = time(nullptr);
    std::tm tm {};
    gmtime_r(&t, &tm);
    char buf[32];
    strftime(buf, sizeof(buf), "%Y%m%d%H%M%S", &tm);
    return buf;
}

std::optional<audit_event> parse_line(const std::string& line) {
    // seq|timestamp|category|study_uid|version|detail (detail may contain '|')
    std::vector<size_t> bars;
    for (size_t i = 0; i < line.size() && bars.size() < 5; ++i) {
        if (line[i] == '|') bars.push_back(i);
    }
    if (bars.size() < 5) return std::nullopt;
    audit_event e;
    auto seq = util::parse_integer(line.substr(0, bars[0]));
    if (!seq) return std::nullopt;
    e.sequence = static_cast<uint64_t>(*seq);
    e.timestamp = line.substr(bars[0] + 1, bars[1] - bars[0] - 1);
    auto cat = audit_category_from_name(line.substr(bars[1] + 1, bars[2] - bars[1] - 1));
    if (!cat) return std::nullopt;
    e.category = *cat;
    e.study_uid = line.substr(bars[2] + 1, bars[3] - bars[2] - 1);
    auto version = util::parse_integer(line.substr(bars[3] + 1, bars[4] - bars[3] - 1));
    e.ruleset_version = version ? static_cast<uint64_t>(*version) : 0;
    e.detail = line.substr(bars[4] + 1);
    return e;
}

}  // namespace

audit_log::audit_log(std::string path) : path_(std::move(path)) {
    auto parent = std::filesystem::path(path_).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    for (const auto& e : read_file(path_)) {
        next_sequence_ = std::max(next_sequence_, e.sequence + 1);
    }
}

uint64_t audit_log::append(audit_category category, const std::string& study_uid,
                           const std::string& detail, uint64_t ruleset_version) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) raise(errc::write_failed, "cannot append to audit log " + path_);
    uint64_t seq = next_sequence_++;
    std::string flat = detail;
    for (auto& c : flat) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    out << seq << '|' << now_stamp() << '|' << audit_category_name(category) << '|' << study_uid
        << '|' << ruleset_version << '|' << flat << '\n';
    return seq;
}

std::vector<audit_event> audit_log::query(const audit_filter& filter) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return query_file(path_, filter);
}

std::vector<audit_event> audit_log::read_file(const std::string& path) {
    return query_file(path, {});
}

std::vector<audit_event> audit_log::query_file(const std::string& path,
                                               const audit_filter& filter) {
    std::vector<audit_event> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto e = parse_line(line);
        if (e && filter.matches(*e)) out.push_back(std::move(*e));
    }
    return out;
}

}  // namespace flowgate::gateway
