#pragma once

#include <string_view>

#include "flowgate/dag/types.hpp"

namespace flowgate::dag {

// Checks acyclicity (the error message names the cycle), single-producer
// inputs, and port-type agreement across every edge. Throws
// errc::cycle_detected / errc::dangling_input / errc::port_type_mismatch.
void validate_dag(const app_graph& g);

// Topological operator order (validate_dag must have passed).
std::vector<std::string> topological_order(const app_graph& g);

// Graph file in the shared section grammar:
//   [operator <name>]
//   kind = study_loader
//   criteria = slice_thickness >= 2.0     (series_selector)
//   threshold = 400                        (stub_inference)
//   min_fraction = 0.01                    (stub_inference)
//   [edge]
//   from = loader.studies
//   to = selector.studies
app_graph parse_graph(std::string_view text);

}  // namespace flowgate::dag
