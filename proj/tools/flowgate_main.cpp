// flowgate: the router service and its admin verbs.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "flowgate/gateway/gateway.hpp"
#include "flowgate/rules/parser.hpp"
#include "flowgate/util/sections.hpp"

namespace {

std::atomic<bool> g_stop {false};

void on_signal(int) { g_stop.store(true); }

int cmd_serve(const std::string& config_path) {
    using namespace flowgate;
    auto config = gateway::load_gateway_config(config_path);
    gateway::gateway_service service(std::move(config));
    std::cout << "flowgate listening: dicom port " << service.dicom_port() << ", admin port "
              << service.admin_port() << "\n";
    std::cout << "audit log: " << service.audit_path() << "\n";

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    std::cout << "shutting down\n";
    service.stop();
    return 0;
}

int cmd_reload(const std::string& host, uint16_t port) {
    auto reply = flowgate::gateway::admin_request(host, port, "RELOAD");
    std::cout << reply << "\n";
    return reply.rfind("OK", 0) == 0 ? 0 : 1;
}

int cmd_audit(const std::string& config_path, const std::string& study,
              const std::string& category, uint64_t from, uint64_t to) {
    using namespace flowgate::gateway;
    auto config = load_gateway_config(config_path);
    audit_filter filter;
    if (!study.empty()) filter.study_uid = study;
    if (!category.empty()) {
        auto c = audit_category_from_name(category);
        if (!c) {
            std::cerr << "unknown category '" << category << "'\n";
            return 2;
        }
        filter.category = c;
    }
    if (from > 0) filter.sequence_from = from;
    if (to > 0) filter.sequence_to = to;

    for (const auto& e : audit_log::query_file(config.audit_file, filter)) {
        std::cout << e.sequence << "  " << e.timestamp << "  "
                  << audit_category_name(e.category) << "  " << e.study_uid << "  v"
                  << e.ruleset_version << "  " << e.detail << "\n";
    }
    return 0;
}

int cmd_validate(const std::string& rules_path) {
    using namespace flowgate;
    std::ifstream in(rules_path);
    if (!in) {
        std::cerr << "cannot open " << rules_path << "\n";
        return 2;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        auto sections = util::scan_sections(text);
        std::vector<util::section> rule_sections;
        for (auto& sec : sections) {
            if (sec.kind != "gateway") rule_sections.push_back(std::move(sec));
        }
        auto rs = rules::parse_rules_sections(rule_sections, 1);
        std::cout << "OK: " << rs.sources.size() << " sources, " << rs.destinations.size()
                  << " destinations, " << rs.rules.size() << " rules\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "INVALID: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app {"flowgate - smart DICOM routing gateway"};
    app.require_subcommand(1);

    std::string config_path;
    auto* serve = app.add_subcommand("serve", "run the gateway service");
    serve->add_option("--config", config_path, "gateway config file")->required();

    std::string host = "127.0.0.1";
    uint16_t admin_port = 0;
    auto* reload = app.add_subcommand("reload", "swap in the rules file on a running gateway");
    reload->add_option("--host", host, "admin host");
    reload->add_option("--port", admin_port, "admin port")->required();

    std::string audit_config;
    std::string study;
    std::string category;
    uint64_t from = 0;
    uint64_t to = 0;
    auto* audit = app.add_subcommand("audit", "query the audit trail");
    audit->add_option("--config", audit_config, "gateway config file")->required();
    audit->add_option("--study", study, "filter by study UID");
    audit->add_option("--category", category, "filter by category");
    audit->add_option("--from", from, "sequence range start");
    audit->add_option("--to", to, "sequence range end");

    std::string rules_path;
    auto* validate = app.add_subcommand("validate", "check a rules/config file");
    validate->add_option("--rules", rules_path, "rules file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed()) return cmd_serve(config_path);
        if (reload->parsed()) return cmd_reload(host, admin_port);
        if (audit->parsed()) return cmd_audit(audit_config, study, category, from, to);
        if (validate->parsed()) return cmd_validate(rules_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
