#include "pvdc/pointcloud_io.hpp"

#include <cstring>
#include <fstream>

namespace pvdc {

namespace {

void write_u32_le(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw ParseError(path + ": truncated header @byte " + std::to_string(in.tellg()));
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

void write_f32_le(std::ofstream& out, float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    write_u32_le(out, u);
}

} // namespace

void save_pvpc(const std::string& path, const PointCloud<double>& cloud) {
    cloud.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    const std::uint32_t n = std::uint32_t(cloud.size());
    const std::uint32_t c = std::uint32_t(3 + cloud.feature_channels());
    out.write("PVPC", 4);
    write_u32_le(out, 1); // version
    write_u32_le(out, n);
    write_u32_le(out, c);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) write_f32_le(out, float(cloud.coords[i * 3 + a]));
        for (std::uint32_t f = 3; f < c; ++f)
            write_f32_le(out, float(cloud.features.at(i * (c - 3) + (f - 3))));
    }
    if (!out) throw Error("write failed: " + path);
}

PointCloud<double> load_pvpc(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "PVPC", 4) != 0)
        throw ParseError(path + ": missing PVPC magic");
    const std::uint32_t version = read_u32_le(in, path);
    if (version != 1) throw ParseError(path + ": unsupported PVPC version " + std::to_string(version));
    const std::uint32_t n = read_u32_le(in, path);
    const std::uint32_t c = read_u32_le(in, path);
    if (n == 0) throw ParseError(path + ": empty point cloud");
    if (c < 3) throw ParseError(path + ": column count must be >= 3, got " + std::to_string(c));

    std::vector<unsigned char> payload(std::size_t(n) * c * 4);
    if (!in.read(reinterpret_cast<char*>(payload.data()), std::streamsize(payload.size())))
        throw ParseError(path + ": truncated payload @byte " + std::to_string(in.tellg()));

    PointCloud<double> cloud;
    cloud.coords.resize(std::size_t(n) * 3);
    std::vector<double> feats;
    if (c > 3) feats.resize(std::size_t(n) * (c - 3));
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t col = 0; col < c; ++col) {
            const unsigned char* b = payload.data() + (i * c + col) * 4;
            const std::uint32_t u = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
                                    std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
            float f;
            std::memcpy(&f, &u, 4);
            if (col < 3) cloud.coords[i * 3 + col] = double(f);
            else feats[i * (c - 3) + (col - 3)] = double(f);
        }
    if (c > 3)
        cloud.features = Tensor<double>::from_data({n, c - 3u}, std::move(feats));
    return cloud;
}

void save_xyz(const std::string& path, const PointCloud<double>& cloud) {
    cloud.validate();
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out.precision(9);
    const std::size_t fc = cloud.feature_channels();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << cloud.coords[i * 3] << " " << cloud.coords[i * 3 + 1] << " "
            << cloud.coords[i * 3 + 2];
        for (std::size_t f = 0; f < fc; ++f) out << " " << cloud.features.at(i * fc + f);
        out << "\n";
    }
    if (!out) throw Error("write failed: " + path);
}

} // namespace pvdc
