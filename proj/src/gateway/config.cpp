#include "flowgate/gateway/config.hpp"

#include <filesystem>
#include <fstream>

#include "flowgate/error.hpp"
#include "flowgate/rules/parser.hpp"
#include "flowgate/util/sections.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::gateway {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::config_invalid, "cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

[[noreturn]] void invalid(const std::string& message) {
    raise(errc::config_invalid, message);
}

int parse_int_key(const util::section& sec, const std::string& key, int fallback) {
    const auto* v = sec.find(key);
    if (v == nullptr) return fallback;
    auto n = util::parse_integer(*v);
    if (!n) invalid("bad integer for " + key + ": '" + *v + "'");
    return static_cast<int>(*n);
}

std::vector<std::string> parse_name_list(const std::string& value) {
    std::vector<std::string> out;
    for (auto& part : util::split(value, ',')) {
        auto name = util::trim(part);
        if (!name.empty()) out.push_back(std::move(name));
    }
    return out;
}

rules::rule_set parse_rules_text(const std::string& text, uint64_t version) {
    auto sections = util::scan_sections(text);
    std::vector<util::section> rule_sections;
    for (auto& sec : sections) {
        if (sec.kind != "gateway") rule_sections.push_back(std::move(sec));
    }
    return rules::parse_rules_sections(rule_sections, version);
}

}  // namespace

gateway_config load_gateway_config(const std::string& path) {
    gateway_config cfg;
    cfg.config_path = path;
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty() || fs::path(p).is_absolute()) return p;
        return (base / p).string();
    };

    std::string text = read_file(path);

    std::vector<util::section> sections;
    try {
        sections = util::scan_sections(text);
    } catch (const error& e) {
        invalid(e.what());
    }

    const util::section* gw = nullptr;
    std::vector<util::section> rule_sections;
    for (auto& sec : sections) {
        if (sec.kind == "gateway") {
            if (gw != nullptr) invalid("more than one [gateway] section");
            gw = &sec;
        } else {
            rule_sections.push_back(sec);
        }
    }
    if (gw == nullptr) invalid("missing [gateway] section");

    try {
        if (const auto* v = gw->find("listen_port")) {
            auto n = util::parse_integer(*v);
            if (!n || *n < 0 || *n > 65535) invalid("bad listen_port '" + *v + "'");
            cfg.listen_port = static_cast<uint16_t>(*n);
        }
        if (const auto* v = gw->find("admin_port")) {
            auto n = util::parse_integer(*v);
            if (!n || *n < 0 || *n > 65535) invalid("bad admin_port '" + *v + "'");
            cfg.admin_port = static_cast<uint16_t>(*n);
        }
        const auto* ae = gw->find("ae_title");
        if (ae == nullptr) invalid("[gateway] needs ae_title");
        cfg.ae_title = dimse::ae_title::parse(*ae);

        if (const auto* v = gw->find("allow_unknown_sources")) {
            cfg.allow_unknown_sources = (*v == "true");
        }
        if (const auto* v = gw->find("viewer_dests")) cfg.viewer_dests = parse_name_list(*v);
        if (const auto* v = gw->find("ai_dests")) cfg.ai_dests = parse_name_list(*v);
        if (const auto* v = gw->find("hl7_host")) cfg.hl7_host = *v;
        if (const auto* v = gw->find("hl7_port")) {
            auto n = util::parse_integer(*v);
            if (!n || *n < 0 || *n > 65535) invalid("bad hl7_port '" + *v + "'");
            cfg.hl7_port = static_cast<uint16_t>(*n);
        }
        if (const auto* v = gw->find("hl7_strict_layout")) {
            cfg.hl7_strict_layout = (*v == "true");
        }
        if (const auto* v = gw->find("hl7_priority_threshold")) {
            auto p = rules::priority_from_name(*v);
            if (!p) invalid("bad hl7_priority_threshold '" + *v + "'");
            cfg.hl7_priority_threshold = *p;
        }
        if (const auto* v = gw->find("hl7_sending_app")) cfg.hl7_sending_app = *v;
        if (const auto* v = gw->find("hl7_receiving_app")) cfg.hl7_receiving_app = *v;
        if (const auto* v = gw->find("template")) cfg.template_path = resolve(*v);
        cfg.retry_max = parse_int_key(*gw, "retry_max", cfg.retry_max);
        cfg.retry_backoff_ms = parse_int_key(*gw, "retry_backoff_ms", cfg.retry_backoff_ms);
        cfg.retry_multiplier = parse_int_key(*gw, "retry_multiplier", cfg.retry_multiplier);
        cfg.ai_timeout_s = parse_int_key(*gw, "ai_timeout_s", cfg.ai_timeout_s);
        cfg.study_inactivity_ms =
            parse_int_key(*gw, "study_inactivity_ms", cfg.study_inactivity_ms);
        if (const auto* v = gw->find("quarantine_dir")) cfg.quarantine_dir = *v;
        if (const auto* v = gw->find("dead_letter_dir")) cfg.dead_letter_dir = *v;
        if (const auto* v = gw->find("audit_file")) cfg.audit_file = *v;
        if (const auto* v = gw->find("rules")) cfg.rules_path = resolve(*v);
    } catch (const error& e) {
        if (e.kind() == errc::config_invalid) throw;
        invalid(e.what());
    }
    cfg.quarantine_dir = resolve(cfg.quarantine_dir);
    cfg.dead_letter_dir = resolve(cfg.dead_letter_dir);
    cfg.audit_file = resolve(cfg.audit_file);

    // Rules live in this file unless an external rules file is named.
    try {
        if (!cfg.rules_path.empty()) {
            cfg.routing = parse_rules_text(read_file(cfg.rules_path), 1);
        } else {
            cfg.rules_path = path;
            cfg.routing = rules::parse_rules_sections(rule_sections, 1);
        }
    } catch (const error& e) {
        invalid(std::string("rules: ") + e.what());
    }

    for (const auto& name : cfg.viewer_dests) {
        if (cfg.routing.find_destination(name) == nullptr) {
            invalid("viewer destination '" + name + "' is not declared");
        }
    }
    for (const auto& name : cfg.ai_dests) {
        if (cfg.routing.find_destination(name) == nullptr) {
            invalid("ai destination '" + name + "' is not declared");
        }
    }

    if (!cfg.template_path.empty()) {
        try {
            cfg.mapping = sr::parse_mapping_template(read_file(cfg.template_path));
        } catch (const error& e) {
            invalid(std::string("mapping template: ") + e.what());
        }
    }

    for (const std::string& dir : {cfg.quarantine_dir, cfg.dead_letter_dir}) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) invalid("cannot create directory " + dir);
    }
    return cfg;
}

rules::rule_set load_rules_for_reload(const gateway_config& config, uint64_t new_version) {
    try {
        return parse_rules_text(read_file(config.rules_path), new_version);
    } catch (const error& e) {
        if (e.kind() == errc::config_invalid) throw;
        raise(errc::config_invalid, std::string("rules: ") + e.what());
    }
}

}  // namespace flowgate::gateway
