#pragma once

#include <filesystem>
#include <optional>

#include "flowgate/dag/types.hpp"
#include "flowgate/util/clock.hpp"
#include "flowgate/util/uid.hpp"

namespace flowgate::dag {

struct run_options {
    std::optional<int> threshold;        // overrides every stub_inference op
    std::optional<double> min_fraction;
    std::optional<uint64_t> seed;        // seeds the UID and clock sources
};

struct operator_record {
    std::string name;
    std::string kind;
    double wall_ms = 0;
    bool executed = false;
    bool failed = false;
    std::string failure;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;  // files written
};

struct run_manifest {
    bool ok = false;
    std::string failed_operator;
    std::string failure;
    std::vector<operator_record> operators;  // topological order
    std::vector<std::filesystem::path> output_files;
    std::optional<inference_result> result;  // from the last stub_inference

    std::string format() const;  // plain-text key-value report
};

// Validates, then executes the operators in topological order, passing
// values along edges. A failing operator marks the run failed and its
// downstream operators are skipped. Deterministic for identical inputs when
// seeded.
run_manifest run_app(const app_graph& g, const std::filesystem::path& input_dir,
                     const std::filesystem::path& output_dir, const run_options& options = {});

}  // namespace flowgate::dag
