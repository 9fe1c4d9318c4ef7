#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowgate/dicom/tag.hpp"
#include "flowgate/dicom/vr.hpp"
#include "flowgate/util/bytes.hpp"

namespace flowgate::dicom {

class data_set;

// One attribute. Value bytes are kept exactly as parsed (padding included);
// padding to even length happens on construction for new values. SQ elements
// carry nested datasets in `items` and no bytes.
class data_element {
public:
    data_element() = default;
    data_element(tag t, vr v, util::byte_buffer value);
    data_element(tag t, vr v, std::string_view text);
    static data_element sequence(tag t, std::vector<data_set> items);

    tag element_tag() const noexcept { return tag_; }
    vr element_vr() const noexcept { return vr_; }
    const util::byte_buffer& value() const noexcept { return value_; }
    const std::vector<data_set>& items() const noexcept { return items_; }
    std::vector<data_set>& items() noexcept { return items_; }

    // Trailing space/NUL padding stripped.
    std::string as_string() const;
    // Backslash-separated multi-value.
    std::vector<std::string> as_strings() const;

    bool operator==(const data_element& other) const;

private:
    tag tag_;
    vr vr_ = vr::UN;
    util::byte_buffer value_;
    std::vector<data_set> items_;
};

// Ordered attribute collection: strictly ascending tags, no duplicates.
class data_set {
public:
    using const_iterator = std::vector<data_element>::const_iterator;

    const_iterator begin() const noexcept { return elements_.begin(); }
    const_iterator end() const noexcept { return elements_.end(); }
    size_t size() const noexcept { return elements_.size(); }
    bool empty() const noexcept { return elements_.empty(); }

    const data_element* find(tag t) const;
    bool has(tag t) const { return find(t) != nullptr; }

    // Insert or replace, preserving tag order.
    void set(data_element element);
    void set_string(tag t, vr v, std::string_view text) { set(data_element(t, v, text)); }
    void set_bytes(tag t, vr v, util::byte_buffer value) { set(data_element(t, v, std::move(value))); }
    void set_sequence(tag t, std::vector<data_set> items) {
        set(data_element::sequence(t, std::move(items)));
    }
    void set_u16(tag t, vr v, uint16_t value);
    void set_u32(tag t, vr v, uint32_t value);

    // Removing an absent tag is a no-op; returns whether anything was removed.
    bool remove(tag t);

    // Accessors return nullopt when the tag is absent. The numeric accessors
    // throw errc::type_mismatch when the stored text is not parseable.
    std::optional<std::string> get_string(tag t) const;
    std::vector<std::string> get_strings(tag t) const;
    std::optional<double> get_decimal(tag t) const;
    std::optional<long long> get_integer(tag t) const;
    std::optional<uint16_t> get_u16(tag t) const;

    std::string get_string_or(tag t, std::string_view fallback) const {
        auto v = get_string(t);
        return v ? *v : std::string(fallback);
    }

    bool operator==(const data_set& other) const { return elements_ == other.elements_; }

private:
    std::vector<data_element> elements_;
};

}  // namespace flowgate::dicom
