#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "flowgate/dicom/part10.hpp"
#include "flowgate/rules/types.hpp"

namespace flowgate::gateway {

struct delivery_report {
    std::string study_uid;
    std::string sop_instance_uid;
    std::string destination;
    bool delivered = false;
    int retries = 0;
    std::string failure;
};

struct dispatch_options {
    int retry_max = 3;
    int retry_backoff_ms = 500;
    int retry_multiplier = 2;
    std::string dead_letter_dir;
    dimse::ae_title default_calling_ae;
};

// Looks up the current definition of a destination (rules may be swapped
// while the gateway runs).
using destination_resolver = std::function<std::optional<rules::destination_def>(const std::string&)>;
// Invoked once per (instance, destination) with the final outcome.
using delivery_listener = std::function<void(const delivery_report&)>;

// Parallel mode hands each destination's copy to that destination's own
// ordered worker queue, so distinct destinations proceed concurrently while
// per-destination instance order is preserved. Serial mode runs on one
// dedicated worker that visits the destinations in listed order.
class dispatcher {
public:
    dispatcher(dispatch_options options, destination_resolver resolver,
               delivery_listener listener);
    ~dispatcher();

    void enqueue(const dicom::dicom_file& file, const std::string& study_uid,
                 const std::vector<std::string>& destinations, rules::route_mode mode);

    // Blocks until every queued delivery has completed.
    void wait_idle();

    void stop();

private:
    struct job {
        dicom::dicom_file file;
        std::string study_uid;
        std::vector<std::string> destinations;  // one for parallel jobs
    };

    struct worker {
        std::thread thread;
        std::deque<job> queue;
    };

    void run_worker(const std::string& name);
    void deliver(const job& j, const std::string& destination);
    void dead_letter(const job& j, const std::string& destination, const std::string& reason);

    dispatch_options options_;
    destination_resolver resolver_;
    delivery_listener listener_;

    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable idle_;
    std::map<std::string, std::unique_ptr<worker>> workers_;  // key: destination or "\0serial"
    size_t outstanding_ = 0;
    bool stopping_ = false;
};

}  // namespace flowgate::gateway
