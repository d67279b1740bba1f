#include "pvdc/checkpoint.hpp"

#include <bit>
#include <fstream>

namespace pvdc {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 24));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

struct Reader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;
    std::string path;

    void need(std::size_t n) const {
        if (pos + n > size)
            throw ParseError(path + ": truncated checkpoint @byte " + std::to_string(pos));
    }
    std::uint8_t u8() {
        need(1);
        return data[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = std::uint32_t(data[pos]) | std::uint32_t(data[pos + 1]) << 8 |
                          std::uint32_t(data[pos + 2]) << 16 | std::uint32_t(data[pos + 3]) << 24;
        pos += 4;
        return v;
    }
    std::vector<std::uint8_t> bytes(std::size_t n) {
        need(n);
        std::vector<std::uint8_t> out(data + pos, data + pos + n);
        pos += n;
        return out;
    }
};

} // namespace

void Checkpoint::add_f32(const std::string& name, const std::vector<std::uint32_t>& dims,
                         const float* data) {
    CheckpointEntry e;
    e.name = name;
    e.dtype = DType::F32;
    e.dims = dims;
    e.payload.reserve(e.count() * 4);
    for (std::size_t i = 0; i < e.count(); ++i) {
        std::uint32_t u;
        std::memcpy(&u, data + i, 4);
        put_u32(e.payload, u);
    }
    add(std::move(e));
}

void Checkpoint::add_f64(const std::string& name, const std::vector<std::uint32_t>& dims,
                         const double* data) {
    CheckpointEntry e;
    e.name = name;
    e.dtype = DType::F64;
    e.dims = dims;
    e.payload.reserve(e.count() * 8);
    for (std::size_t i = 0; i < e.count(); ++i) {
        std::uint64_t u;
        std::memcpy(&u, data + i, 8);
        put_u64(e.payload, u);
    }
    add(std::move(e));
}

void Checkpoint::add_u64(const std::string& name, std::uint64_t v) {
    CheckpointEntry e;
    e.name = name;
    e.dtype = DType::U64;
    e.dims = {1};
    put_u64(e.payload, v);
    add(std::move(e));
}

void Checkpoint::add_bytes(const std::string& name, const std::string& text) {
    CheckpointEntry e;
    e.name = name;
    e.dtype = DType::U8;
    e.dims = {std::uint32_t(text.size())};
    e.payload.assign(text.begin(), text.end());
    add(std::move(e));
}

std::vector<float> Checkpoint::as_f32(const std::string& name) const {
    const auto& e = get(name);
    if (e.dtype != DType::F32) throw Error("checkpoint: " + name + " is not f32");
    std::vector<float> out(e.count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t u = std::uint32_t(e.payload[i * 4]) | std::uint32_t(e.payload[i * 4 + 1]) << 8 |
                          std::uint32_t(e.payload[i * 4 + 2]) << 16 |
                          std::uint32_t(e.payload[i * 4 + 3]) << 24;
        std::memcpy(&out[i], &u, 4);
    }
    return out;
}

std::vector<double> Checkpoint::as_f64(const std::string& name) const {
    const auto& e = get(name);
    if (e.dtype != DType::F64) throw Error("checkpoint: " + name + " is not f64");
    std::vector<double> out(e.count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= std::uint64_t(e.payload[i * 8 + std::size_t(b)]) << (8 * b);
        std::memcpy(&out[i], &u, 8);
    }
    return out;
}

std::vector<double> Checkpoint::as_real(const std::string& name) const {
    const auto& e = get(name);
    if (e.dtype == DType::F64) return as_f64(name);
    if (e.dtype == DType::F32) {
        const auto f = as_f32(name);
        return std::vector<double>(f.begin(), f.end());
    }
    throw Error("checkpoint: " + name + " is not a float tensor");
}

std::uint64_t Checkpoint::as_u64(const std::string& name) const {
    const auto& e = get(name);
    if (e.dtype != DType::U64 || e.count() != 1)
        throw Error("checkpoint: " + name + " is not a u64 scalar");
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= std::uint64_t(e.payload[std::size_t(b)]) << (8 * b);
    return u;
}

std::string Checkpoint::as_text(const std::string& name) const {
    const auto& e = get(name);
    if (e.dtype != DType::U8) throw Error("checkpoint: " + name + " is not a byte entry");
    return std::string(e.payload.begin(), e.payload.end());
}

void Checkpoint::save(const std::string& path) const {
    std::vector<std::uint8_t> buf;
    buf.push_back('P');
    buf.push_back('V');
    buf.push_back('D');
    buf.push_back('C');
    put_u32(buf, kVersion);
    put_u32(buf, std::uint32_t(entries_.size()));
    for (const auto& e : entries_) {
        put_u32(buf, std::uint32_t(e.name.size()));
        buf.insert(buf.end(), e.name.begin(), e.name.end());
        buf.push_back(std::uint8_t(e.dtype));
        put_u32(buf, std::uint32_t(e.dims.size()));
        for (auto d : e.dims) put_u32(buf, d);
        if (e.payload.size() != e.count() * dtype_size(e.dtype))
            throw Error("checkpoint: payload size mismatch for " + e.name);
        buf.insert(buf.end(), e.payload.begin(), e.payload.end());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    if (!out) throw Error("write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    Reader r{buf.data(), buf.size(), 0, path};

    const auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), "PVDC", 4) != 0)
        throw ParseError(path + ": missing PVDC magic");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = r.u32();

    Checkpoint ckpt;
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointEntry e;
        const std::uint32_t name_len = r.u32();
        const auto name_bytes = r.bytes(name_len);
        e.name.assign(name_bytes.begin(), name_bytes.end());
        const std::uint8_t tag = r.u8();
        if (tag > std::uint8_t(DType::U8))
            throw ParseError(path + ": unknown dtype tag " + std::to_string(tag) + " for " + e.name);
        e.dtype = DType(tag);
        const std::uint32_t rank = r.u32();
        for (std::uint32_t d = 0; d < rank; ++d) e.dims.push_back(r.u32());
        e.payload = r.bytes(e.count() * dtype_size(e.dtype));
        ckpt.add(std::move(e));
    }
    return ckpt;
}

} // namespace pvdc
