#include "flowgate/hl7/message.hpp"

namespace flowgate::hl7 {

void segment::set(int number, std::string value) {
    set_components(number, {std::move(value)});
}

void segment::set_components(int number, std::vector<std::string> values) {
    if (number < 1) return;
    while (fields.size() < static_cast<size_t>(number)) fields.emplace_back();
    field f;
    f.reps[0].components.clear();
    for (auto& v : values) {
        component c;
        c.subs[0] = std::move(v);
        f.reps[0].components.push_back(std::move(c));
    }
    if (f.reps[0].components.empty()) f.reps[0].components.emplace_back();
    fields[static_cast<size_t>(number) - 1] = std::move(f);
}

std::string segment::text(int number) const {
    if (number < 1 || static_cast<size_t>(number) > fields.size()) return "";
    const field& f = fields[static_cast<size_t>(number) - 1];
    delimiters d;
    std::string out;
    for (size_t r = 0; r < f.reps.size(); ++r) {
        if (r > 0) out.push_back(d.repetition);
        const auto& rep = f.reps[r];
        for (size_t c = 0; c < rep.components.size(); ++c) {
            if (c > 0) out.push_back(d.component);
            const auto& comp = rep.components[c];
            for (size_t s = 0; s < comp.subs.size(); ++s) {
                if (s > 0) out.push_back(d.subcomponent);
                out += comp.subs[s];
            }
        }
    }
    return out;
}

segment& hl7_message::add_segment(const std::string& id) {
    segment s;
    s.id = id;
    segments.push_back(std::move(s));
    return segments.back();
}

const segment* hl7_message::find(const std::string& id) const {
    for (const auto& s : segments) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

}  // namespace flowgate::hl7
