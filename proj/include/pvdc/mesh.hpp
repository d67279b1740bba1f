#pragma once

#include <array>
#include <string>

#include "pvdc/pointcloud.hpp"

namespace pvdc {

struct TriangleMesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<std::uint32_t, 3>> faces;
    std::vector<double> face_areas; // cached by update_areas()
    double total_area = 0.0;

    void update_areas();
    void validate() const;
};

enum class MeshFormat { Auto, Obj, Ply, Stl };

// OBJ (ascii), PLY (ascii and binary little-endian) and STL (binary and
// ascii). Polygon faces are fan-triangulated; degenerate faces are kept with
// zero area. Parse failures throw ParseError naming the file and line/byte
// offset; a truncated file never yields a partial mesh.
TriangleMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Auto);

void save_obj(const std::string& path, const TriangleMesh& mesh);

// Area-proportional face choice (cumulative table + binary search) and
// uniform barycentric placement inside the face; bitwise deterministic under
// the seed.
PointCloud<double> sample_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

// Maps a bounding box into [0,1]^3: uniform scale 1/longest-extent, longest
// axis spans exactly [0,1], shorter axes centered. apply(p) = (p + t) * s.
struct NormalizationTransform {
    std::array<double, 3> translation{0, 0, 0};
    double scale = 1.0;

    std::array<double, 3> apply(const std::array<double, 3>& p) const {
        return {(p[0] + translation[0]) * scale, (p[1] + translation[1]) * scale,
                (p[2] + translation[2]) * scale};
    }
    std::array<double, 3> invert(const std::array<double, 3>& p) const {
        return {p[0] / scale - translation[0], p[1] / scale - translation[1],
                p[2] / scale - translation[2]};
    }
};

std::pair<TriangleMesh, NormalizationTransform> normalize(const TriangleMesh& mesh);
std::pair<PointCloud<double>, NormalizationTransform> normalize(const PointCloud<double>& cloud);

void save_transform(const std::string& path, const NormalizationTransform& t);
NormalizationTransform load_transform(const std::string& path);

// Chamfer distance (per-point normalized) between two independent samplings
// of the same mesh: the reconstruction-error floor set by sampling noise.
double sampling_noise_floor(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

// small built-in primitives for tests and demos
TriangleMesh make_box(const std::array<double, 3>& lo, const std::array<double, 3>& hi);
TriangleMesh make_tetrahedron();
TriangleMesh make_icosphere(int subdivisions); // unit sphere at origin
TriangleMesh make_cylinder(double radius, double height, int segments);

} // namespace pvdc
