#include "flowgate/dicom/part10.hpp"

#include <cstdio>
#include <fstream>

#include "flowgate/dicom/codec.hpp"
#include "flowgate/dicom/dict.hpp"
#include "flowgate/dicom/uids.hpp"
#include "flowgate/error.hpp"

namespace flowgate::dicom {

namespace {

constexpr size_t kPreambleSize = 128;
constexpr const char* kMagic = "DICM";

}  // namespace

data_set make_file_meta(const std::string& sop_class, const std::string& sop_instance,
                        const std::string& transfer_syntax) {
    data_set meta;
    meta.set_bytes(tags::file_meta_version, vr::OB, {0x00, 0x01});
    meta.set_string(tags::media_sop_class_uid, vr::UI, sop_class);
    meta.set_string(tags::media_sop_instance_uid, vr::UI, sop_instance);
    meta.set_string(tags::transfer_syntax_uid, vr::UI, transfer_syntax);
    meta.set_string(tags::implementation_class_uid, vr::UI, uids::implementation_class);
    meta.set_string(tags::implementation_version_name, vr::SH, uids::implementation_version);
    return meta;
}

std::string dicom_file::sop_class_uid() const {
    return dataset.get_string_or(tags::sop_class_uid, "");
}

std::string dicom_file::sop_instance_uid() const {
    return dataset.get_string_or(tags::sop_instance_uid, "");
}

dicom_file dicom_file::wrap(data_set dataset, std::string transfer_syntax) {
    auto sop_class = dataset.get_string(tags::sop_class_uid);
    auto sop_instance = dataset.get_string(tags::sop_instance_uid);
    if (!sop_class || !sop_instance || sop_class->empty() || sop_instance->empty()) {
        raise(errc::invariant_violation, "dataset lacks SOP class/instance UIDs");
    }
    dicom_file f;
    f.file_meta = make_file_meta(*sop_class, *sop_instance, transfer_syntax);
    f.dataset = std::move(dataset);
    f.transfer_syntax = std::move(transfer_syntax);
    return f;
}

dicom_file parse_part10(std::span<const uint8_t> bytes, std::vector<std::string>* warnings) {
    if (bytes.size() < kPreambleSize + 4 ||
        std::string_view(reinterpret_cast<const char*>(bytes.data() + kPreambleSize), 4) != kMagic) {
        raise(errc::missing_magic, "no DICM marker at offset 128");
    }

    util::byte_reader r(bytes.subspan(kPreambleSize + 4));

    // File meta is Explicit VR LE; its extent comes from (0002,0000).
    uint16_t fg = r.read_u16_le();
    uint16_t fe = r.read_u16_le();
    tag first(fg, fe);
    if (first != tags::file_meta_group_length) {
        raise(errc::truncated_element, "file meta does not start with (0002,0000)");
    }
    r.skip(2);  // "UL"
    uint16_t gl_len = r.read_u16_le();
    if (gl_len != 4) raise(errc::truncated_element, "bad (0002,0000) length");
    uint32_t meta_length = r.read_u32_le();

    auto meta_bytes = r.read_bytes(meta_length);
    dicom_file f;
    f.file_meta = parse_dataset(meta_bytes, uids::explicit_vr_le, warnings);

    auto ts = f.file_meta.get_string(tags::transfer_syntax_uid);
    if (!ts) raise(errc::truncated_element, "file meta lacks (0002,0010)");
    if (!uids::is_supported_transfer_syntax(*ts)) {
        raise(errc::unsupported_transfer_syntax, *ts);
    }
    f.transfer_syntax = *ts;

    auto rest = r.read_bytes(r.remaining());
    f.dataset = parse_dataset(rest, f.transfer_syntax, warnings);
    return f;
}

util::byte_buffer serialize_part10(const dicom_file& file) {
    for (tag required : {tags::media_sop_class_uid, tags::media_sop_instance_uid,
                         tags::transfer_syntax_uid}) {
        auto v = file.file_meta.get_string(required);
        if (!v || v->empty()) {
            raise(errc::invariant_violation, "file meta missing " + required.to_string());
        }
    }
    if (!uids::is_supported_transfer_syntax(file.transfer_syntax)) {
        raise(errc::unsupported_transfer_syntax, file.transfer_syntax);
    }
    auto declared = file.file_meta.get_string(tags::transfer_syntax_uid);
    if (*declared != file.transfer_syntax) {
        raise(errc::invariant_violation, "file meta (0002,0010) disagrees with transfer_syntax");
    }

    // Meta group body without the group length element itself.
    data_set meta = file.file_meta;
    meta.remove(tags::file_meta_group_length);
    auto meta_bytes = serialize_dataset(meta, uids::explicit_vr_le);

    util::byte_writer w;
    for (size_t i = 0; i < kPreambleSize; ++i) w.write_u8(0);
    w.write_string(kMagic);
    w.write_u16_le(tags::file_meta_group_length.group);
    w.write_u16_le(tags::file_meta_group_length.element);
    w.write_string("UL");
    w.write_u16_le(4);
    w.write_u32_le(static_cast<uint32_t>(meta_bytes.size()));
    w.write_bytes(meta_bytes);
    w.write_bytes(serialize_dataset(file.dataset, file.transfer_syntax));
    return w.take();
}

dicom_file read_part10_file(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::missing_magic, "cannot open " + path);
    util::byte_buffer bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_part10(bytes, warnings);
}

void write_part10_file(const std::string& path, const dicom_file& file) {
    auto bytes = serialize_part10(file);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::write_failed, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(errc::write_failed, "short write to " + path);
}

}  // namespace flowgate::dicom
