#include "picl/safetensors.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

#include "picl/common.hpp"

namespace picl {

namespace {

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void write_u64_le(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

}  // namespace

tensor_map read_safetensors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open weights file: " + path.string());
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (raw.size() < 8) throw data_error("weights file too short: " + path.string());

    const std::uint64_t header_len = read_u64_le(raw.data());
    if (header_len > raw.size() - 8)
        throw data_error("weights header length exceeds file size: " + path.string());

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(raw.begin() + 8, raw.begin() + 8 + header_len);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed weights header: " + std::string(e.what()));
    }
    if (!header.is_object()) throw data_error("weights header is not a JSON object");

    const unsigned char* buffer = raw.data() + 8 + header_len;
    const std::uint64_t buffer_len = raw.size() - 8 - header_len;

    tensor_map out;
    for (const auto& [name, entry] : header.items()) {
        if (name == "__metadata__") continue;
        if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
            !entry.contains("data_offsets"))
            throw data_error("malformed header entry for tensor: " + name);
        const std::string dtype = entry["dtype"].get<std::string>();
        if (dtype != "F32") continue;

        tensor t;
        std::int64_t numel = 1;
        for (const auto& d : entry["shape"]) {
            const std::int64_t dim = d.get<std::int64_t>();
            if (dim < 0) throw data_error("negative dimension in tensor: " + name);
            t.shape.push_back(dim);
            numel *= dim;
        }
        const auto& offs = entry["data_offsets"];
        if (!offs.is_array() || offs.size() != 2)
            throw data_error("malformed data_offsets for tensor: " + name);
        const std::uint64_t begin = offs[0].get<std::uint64_t>();
        const std::uint64_t end = offs[1].get<std::uint64_t>();
        if (begin > end || end > buffer_len)
            throw data_error("data_offsets out of range for tensor: " + name);
        if (end - begin != static_cast<std::uint64_t>(numel) * 4)
            throw data_error("data size does not match shape for tensor: " + name);

        t.data.resize(static_cast<std::size_t>(numel));
        std::memcpy(t.data.data(), buffer + begin, end - begin);
        out.insert(name, std::move(t));
    }
    out.validate_finite();
    return out;
}

void write_safetensors(const std::filesystem::path& path, const tensor_map& tensors) {
    nlohmann::json header = nlohmann::json::object();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : tensors) {
        const std::uint64_t bytes = static_cast<std::uint64_t>(t.numel()) * 4;
        header[name] = {{"dtype", "F32"},
                        {"shape", t.shape},
                        {"data_offsets", {offset, offset + bytes}}};
        offset += bytes;
    }
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write weights file: " + path.string());
    write_u64_le(out, header_str.size());
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& [name, t] : tensors)
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * 4));
    if (!out) throw data_error("write failed: " + path.string());
}

}  // namespace picl
