#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <memory>
#include <string>

namespace flowgate::util {

// Timestamp source. The seeded variant hands out a fixed base time advancing
// one second per call, so repeated runs produce identical HL7/DICOM dates.
class clock_source {
public:
    virtual ~clock_source() = default;

    // "YYYYMMDDHHMMSS"
    virtual std::string timestamp() = 0;

    std::string date() { return timestamp().substr(0, 8); }
    std::string time_of_day() { return timestamp().substr(8); }

    static std::shared_ptr<clock_source> system();
    static std::shared_ptr<clock_source> seeded(uint64_t seed);
};

class system_clock_source final : public clock_source {
public:
    std::string timestamp() override {
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm {};
        gmtime_r(&now, &tm);
        char buf[32];
        strftime(buf, sizeof(buf), "%Y%m%d%H%M%S", &tm);
        return buf;
    }
};

class seeded_clock_source final : public clock_source {
public:
    explicit seeded_clock_source(uint64_t seed)
        : base_(1704110400 + static_cast<time_t>(seed % 86400)) {}  // 2024-01-01T12:00Z + seed offset

    std::string timestamp() override {
        time_t t = base_ + static_cast<time_t>(tick_.fetch_add(1));
        std::tm tm {};
        gmtime_r(&t, &tm);
        char buf[32];
        strftime(buf, sizeof(buf), "%Y%m%d%H%M%S", &tm);
        return buf;
    }

private:
    time_t base_;
    std::atomic<uint64_t> tick_ {0};
};

inline std::shared_ptr<clock_source> clock_source::system() {
    return std::make_shared<system_clock_source>();
}

inline std::shared_ptr<clock_source> clock_source::seeded(uint64_t seed) {
    return std::make_shared<seeded_clock_source>(seed);
}

}  // namespace flowgate::util
