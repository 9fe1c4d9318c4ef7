#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "flowgate/rules/types.hpp"
#include "flowgate/sim/synth.hpp"

namespace flowgate::sim {

// Harness process standing in for the clinical AI node: receives instances
// over DIMSE, runs the operator pipeline once the study goes quiet, and
// stores the resulting SR back to the gateway.
class ai_receiver {
public:
    struct options {
        std::string ae_title = "AI_NODE";
        std::string gateway_host = "127.0.0.1";
        uint16_t gateway_port = 0;
        std::string gateway_ae = "FLOWGATE";
        std::filesystem::path work_dir;
        int inactivity_ms = 700;
        std::string selector_criteria = "slice_thickness >= 2.0";
        int threshold = 400;
        double min_fraction = 0.01;
        uint64_t seed = 1;
    };

    explicit ai_receiver(const options& opts);
    ~ai_receiver();

    uint16_t port() const;
    size_t runs_completed() const;

    // The gateway port is only known once the gateway is up; the receiver
    // reads it when a pipeline run fires.
    void set_gateway(const std::string& host, uint16_t port);

    void stop();

private:
    struct impl;
    std::shared_ptr<impl> impl_;
};

struct scenario_config {
    uint64_t seed = 42;
    synthetic_study_spec study;
    std::filesystem::path work_dir;

    int gateway_inactivity_ms = 300;
    int ai_inactivity_ms = 700;
    int ai_timeout_s = 8;
    bool ai_receiver_enabled = true;
    std::string selector_criteria = "slice_thickness >= 2.0";
    int stub_threshold = 400;
    double stub_min_fraction = 0.01;
    rules::priority_level hl7_priority_threshold = rules::priority_level::high;

    std::string expect_detection = "POS";         // POS | NEG
    std::string expect_state = "HL7_SENT";        // final StudyRecord state
    size_t expect_mllp_messages = 1;
    int wait_timeout_s = 25;
};

struct scenario_report {
    bool passed = true;
    std::vector<std::pair<std::string, bool>> assertions;

    void expect(const std::string& label, bool ok) {
        assertions.emplace_back(label, ok);
        passed = passed && ok;
    }

    std::string format() const;
};

// Parses a scenario config file in the shared section grammar ([scenario] +
// [study] + optional [series] sections).
scenario_config parse_scenario(const std::string& text);

// Full pipeline on one machine: PACS + viewer + interface-engine sinks, the
// gateway, and the AI receiver; sends the synthetic study and asserts on
// every leg.
scenario_report run_scenario_e2e(const scenario_config& config);

}  // namespace flowgate::sim
