#include "flowgate/dicom/dataset.hpp"

#include <algorithm>

#include "flowgate/error.hpp"
#include "flowgate/util/strings.hpp"

namespace flowgate::dicom {

namespace {

void pad_even(util::byte_buffer& value, vr v) {
    if (value.size() % 2 != 0) {
        value.push_back(vr_pads_with_null(v) ? 0x00 : ' ');
    }
}

}  // namespace

data_element::data_element(tag t, vr v, util::byte_buffer value)
    : tag_(t), vr_(v), value_(std::move(value)) {
    pad_even(value_, vr_);
}

data_element::data_element(tag t, vr v, std::string_view text)
    : tag_(t), vr_(v), value_(text.begin(), text.end()) {
    pad_even(value_, vr_);
}

data_element data_element::sequence(tag t, std::vector<data_set> items) {
    data_element e;
    e.tag_ = t;
    e.vr_ = vr::SQ;
    e.items_ = std::move(items);
    return e;
}

std::string data_element::as_string() const {
    return util::trim_dicom(util::to_string(value_));
}

std::vector<std::string> data_element::as_strings() const {
    auto parts = util::split(util::to_string(value_), '\\');
    for (auto& p : parts) p = util::trim_dicom(p);
    return parts;
}

bool data_element::operator==(const data_element& other) const {
    return tag_ == other.tag_ && vr_ == other.vr_ && value_ == other.value_ &&
           items_ == other.items_;
}

const data_element* data_set::find(tag t) const {
    auto it = std::lower_bound(elements_.begin(), elements_.end(), t,
                               [](const data_element& e, tag key) { return e.element_tag() < key; });
    if (it != elements_.end() && it->element_tag() == t) return &*it;
    return nullptr;
}

void data_set::set(data_element element) {
    auto it = std::lower_bound(
        elements_.begin(), elements_.end(), element.element_tag(),
        [](const data_element& e, tag key) { return e.element_tag() < key; });
    if (it != elements_.end() && it->element_tag() == element.element_tag()) {
        *it = std::move(element);
    } else {
        elements_.insert(it, std::move(element));
    }
}

void data_set::set_u16(tag t, vr v, uint16_t value) {
    util::byte_writer w;
    w.write_u16_le(value);
    set_bytes(t, v, w.take());
}

void data_set::set_u32(tag t, vr v, uint32_t value) {
    util::byte_writer w;
    w.write_u32_le(value);
    set_bytes(t, v, w.take());
}

bool data_set::remove(tag t) {
    auto it = std::lower_bound(elements_.begin(), elements_.end(), t,
                               [](const data_element& e, tag key) { return e.element_tag() < key; });
    if (it != elements_.end() && it->element_tag() == t) {
        elements_.erase(it);
        return true;
    }
    return false;
}

std::optional<std::string> data_set::get_string(tag t) const {
    const auto* e = find(t);
    if (e == nullptr) return std::nullopt;
    return e->as_string();
}

std::vector<std::string> data_set::get_strings(tag t) const {
    const auto* e = find(t);
    if (e == nullptr) return {};
    return e->as_strings();
}

std::optional<double> data_set::get_decimal(tag t) const {
    const auto* e = find(t);
    if (e == nullptr) return std::nullopt;
    auto v = util::parse_decimal(e->as_string());
    if (!v) {
        raise(errc::type_mismatch,
              t.to_string() + " value \"" + e->as_string() + "\" is not a decimal");
    }
    return *v;
}

std::optional<long long> data_set::get_integer(tag t) const {
    const auto* e = find(t);
    if (e == nullptr) return std::nullopt;
    auto v = util::parse_integer(e->as_string());
    if (!v) {
        raise(errc::type_mismatch,
              t.to_string() + " value \"" + e->as_string() + "\" is not an integer");
    }
    return *v;
}

std::optional<uint16_t> data_set::get_u16(tag t) const {
    const auto* e = find(t);
    if (e == nullptr) return std::nullopt;
    if (e->value().size() < 2) {
        raise(errc::type_mismatch, t.to_string() + " too short for a 16-bit value");
    }
    return static_cast<uint16_t>(e->value()[0] | (e->value()[1] << 8));
}

}  // namespace flowgate::dicom
