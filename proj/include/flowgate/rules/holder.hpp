#pragma once

#include <memory>
#include <mutex>

#include "flowgate/error.hpp"
#include "flowgate/rules/types.hpp"

namespace flowgate::rules {

// Holds the active rule set. Readers snapshot a shared_ptr and evaluate
// against an immutable set; swap replaces the pointer atomically, so a
// reader never observes a partially-updated configuration.
class ruleset_holder {
public:
    explicit ruleset_holder(rule_set initial)
        : current_(std::make_shared<const rule_set>(std::move(initial))) {}

    std::shared_ptr<const rule_set> current() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return current_;
    }

    // Roll-forward requires next.version > current version. With rollback
    // set, any version is accepted and re-stamped current+1, so observed
    // versions stay monotonic. Returns the displaced set.
    rule_set swap(rule_set next, bool rollback = false) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (rollback) {
            next.version = current_->version + 1;
        } else if (next.version <= current_->version) {
            raise(errc::stale_version,
                  "version " + std::to_string(next.version) + " does not exceed current " +
                      std::to_string(current_->version));
        }
        rule_set displaced = *current_;
        current_ = std::make_shared<const rule_set>(std::move(next));
        return displaced;
    }

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const rule_set> current_;
};

}  // namespace flowgate::rules
