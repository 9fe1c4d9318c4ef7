#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>

namespace flowgate::util {

// Private UID root for generated instances; a registered root would replace
// this in a real deployment.
inline constexpr const char* kUidRoot = "1.2.826.0.1.3680043.10.1462";

// Generates DICOM UIDs and HL7 control ids. Seeded instances are fully
// deterministic; the default instance mixes in process entropy.
class uid_source {
public:
    explicit uid_source(uint64_t seed) : rng_(seed), seeded_(true) {}
    uid_source() : rng_(std::random_device{}()), seeded_(false) {}

    std::string next_uid() {
        uint64_t a = draw() % 1000000000ULL;
        uint64_t b = counter_.fetch_add(1);
        return std::string(kUidRoot) + "." + std::to_string(a) + "." + std::to_string(b);
    }

    // GUID-shaped token for HL7 message control ids.
    std::string next_guid() {
        char buf[40];
        uint64_t hi = draw();
        uint64_t lo = draw();
        snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx",
                 static_cast<uint32_t>(hi >> 32), static_cast<uint16_t>(hi >> 16),
                 static_cast<uint16_t>(hi), static_cast<uint16_t>(lo >> 48),
                 static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
        return buf;
    }

    bool seeded() const noexcept { return seeded_; }

    static std::shared_ptr<uid_source> system() { return std::make_shared<uid_source>(); }
    static std::shared_ptr<uid_source> seeded_with(uint64_t seed) {
        return std::make_shared<uid_source>(seed);
    }

private:
    uint64_t draw() {
        std::lock_guard<std::mutex> lock(mutex_);
        return rng_();
    }

    std::mutex mutex_;
    std::mt19937_64 rng_;
    std::atomic<uint64_t> counter_ {0};
    bool seeded_;
};

}  // namespace flowgate::util
