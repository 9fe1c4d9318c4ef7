#include "flowgate/dag/graph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "flowgate/error.hpp"
#include "flowgate/rules/parser.hpp"
#include "flowgate/util/sections.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::dag {

const char* port_type_name(port_type t) {
    switch (t) {
        case port_type::studies: return "studies";
        case port_type::series: return "series";
        case port_type::volume: return "volume";
        case port_type::inference: return "inference";
        case port_type::file_path: return "file_path";
    }
    return "?";
}

bool known_operator_kind(const std::string& kind) {
    return kind == "study_loader" || kind == "series_selector" || kind == "series_to_volume" ||
           kind == "stub_inference" || kind == "sr_writer" || kind == "sc_writer";
}

std::vector<port_spec> input_ports(const std::string& kind) {
    if (kind == "study_loader") return {};
    if (kind == "series_selector") return {{"studies", port_type::studies}};
    if (kind == "series_to_volume") return {{"series", port_type::series}};
    if (kind == "stub_inference") return {{"volume", port_type::volume}};
    if (kind == "sr_writer") {
        return {{"result", port_type::inference}, {"studies", port_type::studies}};
    }
    if (kind == "sc_writer") {
        return {{"result", port_type::inference},
                {"volume", port_type::volume},
                {"studies", port_type::studies}};
    }
    return {};
}

std::vector<port_spec> output_ports(const std::string& kind) {
    if (kind == "study_loader") return {{"studies", port_type::studies}};
    if (kind == "series_selector") return {{"series", port_type::series}};
    if (kind == "series_to_volume") return {{"volume", port_type::volume}};
    if (kind == "stub_inference") return {{"result", port_type::inference}};
    if (kind == "sr_writer" || kind == "sc_writer") return {{"file", port_type::file_path}};
    return {};
}

const operator_spec* app_graph::find_operator(std::string_view name) const {
    for (const auto& op : operators) {
        if (op.name == name) return &op;
    }
    return nullptr;
}

namespace {

std::optional<port_type> port_of(const std::vector<port_spec>& ports, const std::string& name) {
    for (const auto& p : ports) {
        if (p.name == name) return p.type;
    }
    return std::nullopt;
}

}  // namespace

void validate_dag(const app_graph& g) {
    std::set<std::string> names;
    for (const auto& op : g.operators) {
        if (!known_operator_kind(op.kind)) {
            raise(errc::port_type_mismatch,
                  "operator '" + op.name + "' has unknown kind '" + op.kind + "'");
        }
        if (!names.insert(op.name).second) {
            raise(errc::duplicate_name, "operator '" + op.name + "'");
        }
    }

    std::map<std::pair<std::string, std::string>, int> inbound;
    for (const auto& e : g.edges) {
        const auto* from = g.find_operator(e.from_op);
        const auto* to = g.find_operator(e.to_op);
        if (from == nullptr || to == nullptr) {
            raise(errc::dangling_input,
                  "edge references unknown operator '" + (from ? e.to_op : e.from_op) + "'");
        }
        auto out_type = port_of(output_ports(from->kind), e.from_port);
        auto in_type = port_of(input_ports(to->kind), e.to_port);
        if (!out_type) {
            raise(errc::port_type_mismatch,
                  "'" + e.from_op + "' has no output port '" + e.from_port + "'");
        }
        if (!in_type) {
            raise(errc::port_type_mismatch,
                  "'" + e.to_op + "' has no input port '" + e.to_port + "'");
        }
        if (*out_type != *in_type) {
            raise(errc::port_type_mismatch,
                  e.from_op + "." + e.from_port + " (" + port_type_name(*out_type) + ") -> " +
                      e.to_op + "." + e.to_port + " (" + port_type_name(*in_type) + ")");
        }
        inbound[{e.to_op, e.to_port}]++;
    }

    for (const auto& op : g.operators) {
        for (const auto& p : input_ports(op.kind)) {
            int n = 0;
            auto it = inbound.find({op.name, p.name});
            if (it != inbound.end()) n = it->second;
            if (n == 0) {
                raise(errc::dangling_input, op.name + "." + p.name + " has no inbound edge");
            }
            if (n > 1) {
                raise(errc::dangling_input,
                      op.name + "." + p.name + " has " + std::to_string(n) + " inbound edges");
            }
        }
    }

    topological_order(g);  // throws cycle_detected when no order exists
}

std::vector<std::string> topological_order(const app_graph& g) {
    std::map<std::string, std::set<std::string>> downstream;
    std::map<std::string, int> indegree;
    for (const auto& op : g.operators) indegree[op.name] = 0;
    for (const auto& e : g.edges) {
        if (downstream[e.from_op].insert(e.to_op).second) indegree[e.to_op]++;
    }

    // Kahn's algorithm; ready set kept sorted for a deterministic order.
    std::set<std::string> ready;
    for (const auto& [name, deg] : indegree) {
        if (deg == 0) ready.insert(name);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string next = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(next);
        for (const auto& succ : downstream[next]) {
            if (--indegree[succ] == 0) ready.insert(succ);
        }
    }
    if (order.size() != g.operators.size()) {
        // Name the operators still holding edges — they form the cycle(s).
        std::string cycle;
        for (const auto& [name, deg] : indegree) {
            if (deg > 0) {
                if (!cycle.empty()) cycle += " -> ";
                cycle += name;
            }
        }
        raise(errc::cycle_detected, "cycle through: " + cycle);
    }
    return order;
}

app_graph parse_graph(std::string_view text) {
    app_graph g;
    for (const auto& sec : util::scan_sections(text)) {
        if (sec.kind == "operator") {
            if (sec.name.empty()) {
                raise(errc::syntax_error, "line " + std::to_string(sec.line) +
                                              ": [operator] needs a name");
            }
            operator_spec op;
            op.name = sec.name;
            const std::string* kind = sec.find("kind");
            if (kind == nullptr) {
                raise(errc::syntax_error,
                      "line " + std::to_string(sec.line) + ": operator needs a kind");
            }
            op.kind = *kind;
            if (const auto* c = sec.find("criteria")) {
                op.criteria_text = *c;
                op.criteria = rules::parse_match_expr(*c, sec.line);
            }
            if (const auto* t = sec.find("threshold")) {
                auto v = util::parse_integer(*t);
                if (!v) raise(errc::syntax_error, "bad threshold '" + *t + "'");
                op.threshold = static_cast<int>(*v);
            }
            if (const auto* f = sec.find("min_fraction")) {
                auto v = util::parse_decimal(*f);
                if (!v) raise(errc::syntax_error, "bad min_fraction '" + *f + "'");
                op.min_fraction = *v;
            }
            if (const auto* e = sec.find("evaluation_type")) op.evaluation_type = *e;
            g.operators.push_back(std::move(op));
        } else if (sec.kind == "edge") {
            const std::string* from = sec.find("from");
            const std::string* to = sec.find("to");
            if (from == nullptr || to == nullptr) {
                raise(errc::syntax_error,
                      "line " + std::to_string(sec.line) + ": edge needs from and to");
            }
            auto split_ref = [&](const std::string& ref, std::string& op_name,
                                 std::string& port_name) {
                auto dot = ref.find('.');
                if (dot == std::string::npos) {
                    raise(errc::syntax_error, "edge endpoint '" + ref + "' needs op.port");
                }
                op_name = util::trim(ref.substr(0, dot));
                port_name = util::trim(ref.substr(dot + 1));
            };
            graph_edge e;
            split_ref(*from, e.from_op, e.from_port);
            split_ref(*to, e.to_op, e.to_port);
            g.edges.push_back(std::move(e));
        } else {
            raise(errc::syntax_error, "line " + std::to_string(sec.line) +
                                          ": unknown section '" + sec.kind + "'");
        }
    }
    return g;
}

}  // namespace flowgate::dag
