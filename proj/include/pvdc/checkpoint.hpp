#pragma once

#include <cstring>
#include <string>
#include <unordered_map>
#include <vector>

#include "pvdc/base.hpp"

namespace pvdc {

// "PVDC" tensor container: magic, format version u32, then a count-prefixed
// list of (name: length-prefixed UTF-8, dtype tag u8, rank u32, dims u32[],
// payload little-endian scalars). Round-trips bit-exactly.
enum class DType : std::uint8_t { F32 = 0, F64 = 1, U64 = 2, I64 = 3, U8 = 4 };

inline std::size_t dtype_size(DType t) {
    switch (t) {
    case DType::F32: return 4;
    case DType::F64: return 8;
    case DType::U64: return 8;
    case DType::I64: return 8;
    case DType::U8: return 1;
    }
    throw Error("unknown dtype tag");
}

struct CheckpointEntry {
    std::string name;
    DType dtype = DType::F32;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> payload; // little-endian scalars

    std::size_t count() const {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
};

class Checkpoint {
public:
    static constexpr std::uint32_t kVersion = 1;

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    const CheckpointEntry& get(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("checkpoint: missing entry " + name);
        return entries_[it->second];
    }

    const std::vector<CheckpointEntry>& entries() const { return entries_; }

    void add(CheckpointEntry e) {
        if (index_.count(e.name)) throw Error("checkpoint: duplicate entry " + e.name);
        index_[e.name] = entries_.size();
        entries_.push_back(std::move(e));
    }

    void add_f32(const std::string& name, const std::vector<std::uint32_t>& dims,
                 const float* data);
    void add_f64(const std::string& name, const std::vector<std::uint32_t>& dims,
                 const double* data);
    void add_u64(const std::string& name, std::uint64_t v);
    void add_bytes(const std::string& name, const std::string& text);

    std::vector<float> as_f32(const std::string& name) const;
    std::vector<double> as_f64(const std::string& name) const;
    // reads either float precision, widening/narrowing as needed
    std::vector<double> as_real(const std::string& name) const;
    std::uint64_t as_u64(const std::string& name) const;
    std::string as_text(const std::string& name) const;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

private:
    std::vector<CheckpointEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace pvdc
