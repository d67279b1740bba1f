#include "pvdc/mesh.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "pvdc/chamfer.hpp"
#include "pvdc/rng.hpp"

namespace pvdc {

namespace {

double tri_area(const std::array<double, 3>& a, const std::array<double, 3>& b,
                const std::array<double, 3>& c) {
    const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    const double cx = uy * vz - uz * vy;
    const double cy = uz * vx - ux * vz;
    const double cz = ux * vy - uy * vx;
    return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& msg) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void fail_at(const std::string& path, std::size_t byte_offset, const std::string& msg) {
    throw ParseError(path + " @byte " + std::to_string(byte_offset) + ": " + msg);
}

} // namespace

void TriangleMesh::update_areas() {
    face_areas.resize(faces.size());
    total_area = 0.0;
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const auto& f = faces[i];
        face_areas[i] = tri_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        total_area += face_areas[i];
    }
}

void TriangleMesh::validate() const {
    if (vertices.empty()) throw ParseError("mesh: no vertices");
    if (faces.empty()) throw ParseError("mesh: no faces");
    for (const auto& f : faces)
        for (std::uint32_t v : f)
            if (v >= vertices.size())
                throw ParseError("mesh: face index " + std::to_string(v) + " out of range (" +
                                 std::to_string(vertices.size()) + " vertices)");
    bool positive = false;
    for (double a : face_areas)
        if (a > 0.0) positive = true;
    if (!positive) throw ParseError("mesh: all faces are degenerate (zero area)");
}

// ---------------------------------------------------------------- OBJ

namespace {

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    TriangleMesh mesh;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok) || tok[0] == '#') continue;
        if (tok == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) fail(path, lineno, "malformed vertex line");
            mesh.vertices.push_back({x, y, z});
        } else if (tok == "f") {
            std::vector<std::uint32_t> poly;
            std::string ref;
            while (ls >> ref) {
                // "i", "i/j", "i//k", "i/j/k"; negative indices are relative
                const std::size_t slash = ref.find('/');
                const std::string head = slash == std::string::npos ? ref : ref.substr(0, slash);
                long idx = 0;
                try {
                    idx = std::stol(head);
                } catch (...) {
                    fail(path, lineno, "malformed face index '" + ref + "'");
                }
                if (idx < 0) idx = long(mesh.vertices.size()) + idx + 1;
                if (idx < 1 || std::size_t(idx) > mesh.vertices.size())
                    fail(path, lineno, "face index out of range: " + head);
                poly.push_back(std::uint32_t(idx - 1));
            }
            if (poly.size() < 3) fail(path, lineno, "face with fewer than 3 vertices");
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
        }
        // everything else (vt, vn, usemtl, o, g, s, ...) is ignored
    }
    if (in.bad()) throw ParseError(path + ": read error");
    mesh.update_areas();
    mesh.validate();
    return mesh;
}

// ---------------------------------------------------------------- PLY

struct PlyProperty {
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
};

std::size_t ply_type_size(const std::string& t, const std::string& path, std::size_t lineno) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    fail(path, lineno, "unsupported ply type " + t);
}

double read_binary_scalar(std::ifstream& in, const std::string& type, const std::string& path) {
    unsigned char buf[8];
    const std::size_t sz = ply_type_size(type, path, 0);
    if (!in.read(reinterpret_cast<char*>(buf), std::streamsize(sz)))
        fail_at(path, std::size_t(in.tellg()), "truncated binary ply payload");
    // payload is little-endian; assemble explicitly
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < sz; ++i) u |= std::uint64_t(buf[i]) << (8 * i);
    if (type == "float" || type == "float32") {
        float f;
        std::uint32_t u32 = std::uint32_t(u);
        std::memcpy(&f, &u32, 4);
        return double(f);
    }
    if (type == "double" || type == "float64") {
        double d;
        std::memcpy(&d, &u, 8);
        return d;
    }
    if (type == "char" || type == "int8") return double(std::int8_t(u));
    if (type == "short" || type == "int16") return double(std::int16_t(u));
    if (type == "int" || type == "int32") return double(std::int32_t(u));
    return double(u); // unsigned variants
}

TriangleMesh load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string line;
    std::size_t lineno = 0;

    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) fail(path, lineno, "unexpected end of ply header");
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") fail(path, lineno, "missing ply magic");
    bool binary = false;
    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<PlyProperty> props;
    };
    std::vector<Element> elements;
    for (;;) {
        std::istringstream ls(next_line());
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info") continue;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else fail(path, lineno, "unsupported ply format " + fmt);
        } else if (tok == "element") {
            Element e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (tok == "property") {
            if (elements.empty()) fail(path, lineno, "property before element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type >> p.name;
            } else {
                p.type = t;
                ls >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (tok == "end_header") {
            break;
        } else {
            fail(path, lineno, "unknown header token " + tok);
        }
    }

    TriangleMesh mesh;
    for (const auto& e : elements) {
        const bool is_vertex = e.name == "vertex";
        const bool is_face = e.name == "face";
        int xi = -1, yi = -1, zi = -1;
        for (std::size_t p = 0; p < e.props.size(); ++p) {
            if (e.props[p].name == "x") xi = int(p);
            if (e.props[p].name == "y") yi = int(p);
            if (e.props[p].name == "z") zi = int(p);
        }
        if (is_vertex && (xi < 0 || yi < 0 || zi < 0))
            fail(path, lineno, "vertex element lacks x/y/z properties");
        for (std::size_t i = 0; i < e.count; ++i) {
            std::vector<double> scalars;
            std::vector<long> list;
            if (binary) {
                for (const auto& p : e.props) {
                    if (p.is_list) {
                        const auto cnt = std::size_t(read_binary_scalar(in, p.count_type, path));
                        for (std::size_t j = 0; j < cnt; ++j)
                            list.push_back(long(read_binary_scalar(in, p.type, path)));
                    } else {
                        scalars.push_back(read_binary_scalar(in, p.type, path));
                    }
                }
            } else {
                std::istringstream ls(next_line());
                for (const auto& p : e.props) {
                    if (p.is_list) {
                        std::size_t cnt;
                        if (!(ls >> cnt)) fail(path, lineno, "malformed list row");
                        for (std::size_t j = 0; j < cnt; ++j) {
                            long v;
                            if (!(ls >> v)) fail(path, lineno, "truncated list row");
                            list.push_back(v);
                        }
                    } else {
                        double v;
                        if (!(ls >> v)) fail(path, lineno, "malformed scalar row");
                        scalars.push_back(v);
                    }
                }
            }
            if (is_vertex)
                mesh.vertices.push_back(
                    {scalars[std::size_t(xi)], scalars[std::size_t(yi)], scalars[std::size_t(zi)]});
            if (is_face) {
                if (list.size() < 3) fail(path, lineno, "face with fewer than 3 indices");
                for (auto v : list)
                    if (v < 0 || std::size_t(v) >= mesh.vertices.size())
                        fail(path, lineno, "face index out of range");
                for (std::size_t j = 1; j + 1 < list.size(); ++j)
                    mesh.faces.push_back({std::uint32_t(list[0]), std::uint32_t(list[j]),
                                          std::uint32_t(list[j + 1])});
            }
        }
    }
    mesh.update_areas();
    mesh.validate();
    return mesh;
}

// ---------------------------------------------------------------- STL

std::uint32_t read_u32_le(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        fail_at(path, std::size_t(in.tellg()), "truncated stl");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

float read_f32_le(std::ifstream& in, const std::string& path) {
    const std::uint32_t u = read_u32_le(in, path);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

// shared-vertex reconstruction: stl stores raw triangle soup
struct VertexKey {
    double x, y, z;
    bool operator<(const VertexKey& o) const {
        if (x != o.x) return x < o.x;
        if (y != o.y) return y < o.y;
        return z < o.z;
    }
};

TriangleMesh load_stl_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    char header[80];
    if (!in.read(header, 80)) fail_at(path, 0, "truncated stl header");
    const std::uint32_t count = read_u32_le(in, path);

    TriangleMesh mesh;
    std::map<VertexKey, std::uint32_t> seen;
    auto vertex_id = [&](double x, double y, double z) {
        const VertexKey key{x, y, z};
        auto it = seen.find(key);
        if (it != seen.end()) return it->second;
        const auto id = std::uint32_t(mesh.vertices.size());
        mesh.vertices.push_back({x, y, z});
        seen.emplace(key, id);
        return id;
    };
    for (std::uint32_t t = 0; t < count; ++t) {
        for (int i = 0; i < 3; ++i) read_f32_le(in, path); // normal, ignored
        std::uint32_t ids[3];
        for (int v = 0; v < 3; ++v) {
            const double x = double(read_f32_le(in, path));
            const double y = double(read_f32_le(in, path));
            const double z = double(read_f32_le(in, path));
            ids[v] = vertex_id(x, y, z);
        }
        char attr[2];
        if (!in.read(attr, 2)) fail_at(path, std::size_t(in.tellg()), "truncated stl record");
        mesh.faces.push_back({ids[0], ids[1], ids[2]});
    }
    mesh.update_areas();
    mesh.validate();
    return mesh;
}

TriangleMesh load_stl_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    TriangleMesh mesh;
    std::map<VertexKey, std::uint32_t> seen;
    std::vector<std::uint32_t> pending;
    std::string line;
    std::size_t lineno = 0;
    bool closed = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "vertex") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) fail(path, lineno, "malformed stl vertex");
            const VertexKey key{x, y, z};
            auto it = seen.find(key);
            std::uint32_t id;
            if (it != seen.end()) id = it->second;
            else {
                id = std::uint32_t(mesh.vertices.size());
                mesh.vertices.push_back({x, y, z});
                seen.emplace(key, id);
            }
            pending.push_back(id);
        } else if (tok == "endfacet") {
            if (pending.size() != 3) fail(path, lineno, "stl facet without exactly 3 vertices");
            mesh.faces.push_back({pending[0], pending[1], pending[2]});
            pending.clear();
        } else if (tok == "endsolid") {
            closed = true;
        }
    }
    if (!closed) fail(path, lineno, "stl missing endsolid (truncated file)");
    mesh.update_areas();
    mesh.validate();
    return mesh;
}

TriangleMesh load_stl(const std::string& path) {
    // binary files may also begin with "solid": accept ascii only when a
    // facet keyword shows up near the top
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw ParseError(path + ": cannot open file");
    char head[512] = {0};
    probe.read(head, sizeof(head) - 1);
    const std::string s(head, std::size_t(probe.gcount()));
    if (s.rfind("solid", 0) == 0 && s.find("facet") != std::string::npos)
        return load_stl_ascii(path);
    return load_stl_binary(path);
}

MeshFormat sniff_format(const std::string& path) {
    const auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = char(std::tolower(c));
    if (ext == "obj") return MeshFormat::Obj;
    if (ext == "ply") return MeshFormat::Ply;
    if (ext == "stl") return MeshFormat::Stl;
    throw ParseError(path + ": cannot infer mesh format from extension '" + ext + "'");
}

} // namespace

TriangleMesh load_mesh(const std::string& path, MeshFormat format) {
    if (format == MeshFormat::Auto) format = sniff_format(path);
    switch (format) {
    case MeshFormat::Obj: return load_obj(path);
    case MeshFormat::Ply: return load_ply(path);
    case MeshFormat::Stl: return load_stl(path);
    default: throw ParseError(path + ": unknown mesh format");
    }
}

void save_obj(const std::string& path, const TriangleMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out.precision(17);
    for (const auto& v : mesh.vertices) out << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    if (!out) throw Error("write failed: " + path);
}

PointCloud<double> sample_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ContractError("sample_uniform: n must be >= 1");
    if (mesh.face_areas.size() != mesh.faces.size())
        throw ContractError("sample_uniform: face areas not cached; call update_areas()");
    if (!(mesh.total_area > 0.0)) throw ContractError("sample_uniform: mesh has zero total area");

    std::vector<double> cumulative(mesh.faces.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        acc += mesh.face_areas[i];
        cumulative[i] = acc;
    }

    Rng rng(seed);
    PointCloud<double> cloud;
    cloud.coords.resize(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double pick = rng.uniform() * mesh.total_area;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
        const std::size_t fi =
            std::min(std::size_t(it - cumulative.begin()), mesh.faces.size() - 1);
        const auto& f = mesh.faces[fi];
        double u = rng.uniform(), v = rng.uniform();
        if (u + v > 1.0) { // fold into the triangle
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const auto& a = mesh.vertices[f[0]];
        const auto& b = mesh.vertices[f[1]];
        const auto& c = mesh.vertices[f[2]];
        for (int axis = 0; axis < 3; ++axis)
            cloud.coords[i * 3 + axis] =
                a[axis] + u * (b[axis] - a[axis]) + v * (c[axis] - a[axis]);
    }
    return cloud;
}

namespace {

NormalizationTransform transform_from_bbox(const std::array<double, 3>& lo,
                                           const std::array<double, 3>& hi) {
    double longest = 0.0;
    for (int a = 0; a < 3; ++a) longest = std::max(longest, hi[a] - lo[a]);
    if (!(longest > 0.0))
        throw ContractError("normalize: degenerate bounding box (all points identical)");
    NormalizationTransform t;
    t.scale = 1.0 / longest;
    for (int a = 0; a < 3; ++a) {
        const double offset = (1.0 - (hi[a] - lo[a]) * t.scale) / 2.0; // center shorter axes
        t.translation[a] = offset / t.scale - lo[a];
    }
    return t;
}

} // namespace

std::pair<TriangleMesh, NormalizationTransform> normalize(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw ContractError("normalize: empty mesh");
    std::array<double, 3> lo = mesh.vertices[0], hi = mesh.vertices[0];
    for (const auto& v : mesh.vertices)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], v[a]);
            hi[a] = std::max(hi[a], v[a]);
        }
    const auto t = transform_from_bbox(lo, hi);
    TriangleMesh out = mesh;
    for (auto& v : out.vertices) v = t.apply(v);
    out.update_areas();
    return {std::move(out), t};
}

std::pair<PointCloud<double>, NormalizationTransform> normalize(const PointCloud<double>& cloud) {
    if (cloud.size() == 0) throw ContractError("normalize: empty cloud");
    std::array<double, 3> lo{cloud.coords[0], cloud.coords[1], cloud.coords[2]};
    std::array<double, 3> hi = lo;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], cloud.coords[i * 3 + a]);
            hi[a] = std::max(hi[a], cloud.coords[i * 3 + a]);
        }
    const auto t = transform_from_bbox(lo, hi);
    PointCloud<double> out = cloud;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::array<double, 3> p{out.coords[i * 3], out.coords[i * 3 + 1],
                                      out.coords[i * 3 + 2]};
        const auto q = t.apply(p);
        for (int a = 0; a < 3; ++a) out.coords[i * 3 + a] = q[a];
    }
    return {std::move(out), t};
}

void save_transform(const std::string& path, const NormalizationTransform& t) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out.precision(17);
    out << "pvdc-transform v1\n";
    out << "translation " << t.translation[0] << " " << t.translation[1] << " "
        << t.translation[2] << "\n";
    out << "scale " << t.scale << "\n";
    if (!out) throw Error("write failed: " + path);
}

NormalizationTransform load_transform(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string header;
    std::getline(in, header);
    if (header != "pvdc-transform v1") throw ParseError(path + ":1: bad transform header");
    NormalizationTransform t;
    std::string key;
    in >> key >> t.translation[0] >> t.translation[1] >> t.translation[2];
    if (!in || key != "translation") throw ParseError(path + ":2: expected translation");
    in >> key >> t.scale;
    if (!in || key != "scale") throw ParseError(path + ":3: expected scale");
    return t;
}

double sampling_noise_floor(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    const auto a = sample_uniform(mesh, n, derive_seed(seed, 101));
    const auto b = sample_uniform(mesh, n, derive_seed(seed, 202));
    const auto res = chamfer_kdtree(std::span<const double>(a.coords.data(), a.coords.size()),
                                    std::span<const double>(b.coords.data(), b.coords.size()));
    return res.normalized();
}

// ---------------------------------------------------------------- primitives

TriangleMesh make_box(const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
    TriangleMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? hi[0] : lo[0], (i & 2) ? hi[1] : lo[1],
                              (i & 4) ? hi[2] : lo[2]});
    const std::uint32_t quads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                                       {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
    for (const auto& q : quads) {
        m.faces.push_back({q[0], q[1], q[2]});
        m.faces.push_back({q[0], q[2], q[3]});
    }
    m.update_areas();
    return m;
}

TriangleMesh make_tetrahedron() {
    TriangleMesh m;
    m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    m.update_areas();
    return m;
}

TriangleMesh make_icosphere(int subdivisions) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh m;
    m.vertices = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                  {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                  {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    auto project = [](std::array<double, 3>& v) {
        const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        for (auto& c : v) c /= len;
    };
    for (auto& v : m.vertices) project(v);
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            std::array<double, 3> v{(m.vertices[a][0] + m.vertices[b][0]) / 2,
                                    (m.vertices[a][1] + m.vertices[b][1]) / 2,
                                    (m.vertices[a][2] + m.vertices[b][2]) / 2};
            project(v);
            const auto id = std::uint32_t(m.vertices.size());
            m.vertices.push_back(v);
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<std::array<std::uint32_t, 3>> next;
        for (const auto& f : m.faces) {
            const auto ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    m.update_areas();
    return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
    TriangleMesh m;
    const double two_pi = 6.283185307179586476925286766559;
    for (int i = 0; i < segments; ++i) {
        const double a = two_pi * i / segments;
        m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), 0.0});
        m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), height});
    }
    const auto bottom_center = std::uint32_t(m.vertices.size());
    m.vertices.push_back({0, 0, 0});
    const auto top_center = std::uint32_t(m.vertices.size());
    m.vertices.push_back({0, 0, height});
    for (int i = 0; i < segments; ++i) {
        const auto b0 = std::uint32_t(2 * i);
        const auto t0 = std::uint32_t(2 * i + 1);
        const auto b1 = std::uint32_t(2 * ((i + 1) % segments));
        const auto t1 = std::uint32_t(2 * ((i + 1) % segments) + 1);
        m.faces.push_back({b0, b1, t1});
        m.faces.push_back({b0, t1, t0});
        m.faces.push_back({bottom_center, b1, b0});
        m.faces.push_back({top_center, t0, t1});
    }
    m.update_areas();
    return m;
}

} // namespace pvdc
