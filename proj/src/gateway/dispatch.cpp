#include "flowgate/gateway/dispatch.hpp"

#include <filesystem>
#include <fstream>

#include "flowgate/dimse/scu.hpp"
#include "flowgate/error.hpp"

namespace flowgate::gateway {

namespace {

constexpr const char* kSerialWorker = "\x01serial";

}  // namespace

dispatcher::dispatcher(dispatch_options options, destination_resolver resolver,
                       delivery_listener listener)
    : options_(std::move(options)),
      resolver_(std::move(resolver)),
      listener_(std::move(listener)) {}

dispatcher::~dispatcher() { stop(); }

void dispatcher::enqueue(const dicom::dicom_file& file, const std::string& study_uid,
                         const std::vector<std::string>& destinations, rules::route_mode mode) {
    if (destinations.empty()) return;
    std::lock_guard<std::mutex> lock(mutex_);
    if (stopping_) return;

    auto push = [&](const std::string& worker_name, job j) {
        auto& w = workers_[worker_name];
        if (!w) {
            w = std::make_unique<worker>();
            w->thread = std::thread([this, worker_name] { run_worker(worker_name); });
        }
        w->queue.push_back(std::move(j));
        ++outstanding_;
    };

    if (mode == rules::route_mode::parallel) {
        for (const auto& dest : destinations) {
            push(dest, job {file, study_uid, {dest}});
        }
    } else {
        push(kSerialWorker, job {file, study_uid, destinations});
    }
    wake_.notify_all();
}

void dispatcher::run_worker(const std::string& name) {
    while (true) {
        job next;
        {
            std::unique_lock<std::mutex> lock(mutex_);
            auto& w = *workers_.at(name);
            wake_.wait(lock, [&] { return stopping_ || !w.queue.empty(); });
            if (w.queue.empty()) return;  // stopping
            next = std::move(w.queue.front());
            w.queue.pop_front();
        }
        for (const auto& dest : next.destinations) {
            deliver(next, dest);
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (--outstanding_ == 0) idle_.notify_all();
        }
    }
}

void dispatcher::deliver(const job& j, const std::string& destination) {
    delivery_report report;
    report.study_uid = j.study_uid;
    report.sop_instance_uid = j.file.sop_instance_uid();
    report.destination = destination;

    auto def = resolver_(destination);
    if (!def) {
        report.failure = "destination no longer defined";
        dead_letter(j, destination, report.failure);
        report.retries = 0;
        listener_(report);
        return;
    }

    dimse::ae_title calling =
        def->calling_ae_override ? *def->calling_ae_override : options_.default_calling_ae;

    int backoff = options_.retry_backoff_ms;
    for (int attempt = 1; attempt <= std::max(1, options_.retry_max); ++attempt) {
        try {
            auto results = dimse::scu_store({def->host, def->port}, calling, def->called_ae,
                                            {j.file});
            if (!results.empty() && results[0].ok()) {
                report.delivered = true;
                break;
            }
            report.failure = "store status " +
                             std::to_string(results.empty() ? 0 : results[0].status);
        } catch (const std::exception& e) {
            report.failure = e.what();
        }
        if (attempt < std::max(1, options_.retry_max)) {
            ++report.retries;
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= std::max(1, options_.retry_multiplier);
        }
    }

    if (!report.delivered) {
        dead_letter(j, destination, report.failure);
    }
    listener_(report);
}

void dispatcher::dead_letter(const job& j, const std::string& destination,
                             const std::string& reason) {
    if (options_.dead_letter_dir.empty()) return;
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(options_.dead_letter_dir, ec);
    std::string stem = j.file.sop_instance_uid() + "." + destination;
    try {
        dicom::write_part10_file((fs::path(options_.dead_letter_dir) / (stem + ".dcm")).string(),
                                 j.file);
        std::ofstream note(fs::path(options_.dead_letter_dir) / (stem + ".reason"));
        note << reason << "\n";
    } catch (const std::exception&) {
        // dead-lettering is best effort; the audit trail still records it
    }
}

void dispatcher::wait_idle() {
    std::unique_lock<std::mutex> lock(mutex_);
    idle_.wait(lock, [&] { return outstanding_ == 0; });
}

void dispatcher::stop() {
    std::vector<std::thread> threads;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (stopping_) return;
        stopping_ = true;
        for (auto& [name, w] : workers_) {
            threads.push_back(std::move(w->thread));
        }
        wake_.notify_all();
    }
    for (auto& t : threads) {
        if (t.joinable()) t.join();
    }
}

}  // namespace flowgate::gateway
