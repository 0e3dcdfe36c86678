#include "decheat/mesh.hpp"

#include "decheat/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace decheat {

namespace {

constexpr double kDegenerateAreaRatio = 1e-14;
constexpr double kNegativeDualRatio = 1e-12;
// Per-triangle contributions this close to zero are rounding noise (right angles).
constexpr double kDualSnapRatio = 64 * std::numeric_limits<double>::epsilon();

double corner_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

void check_triangle_geometry(const Vec3& a, const Vec3& b, const Vec3& c, Index t) {
    const double longest =
        std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    if (!(corner_area(a, b, c) > kDegenerateAreaRatio * longest)) {
        throw GeometryError("triangle " + std::to_string(t) + " has zero area");
    }
}

struct HalfEdgeRecord {
    Index lo, hi;
    Index face;
    Index local; // corner opposite this edge
    bool forward; // traversed lo -> hi inside the face
};

} // namespace

SimplicialSurface::SimplicialSurface(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const auto nv = vertices_.size();
    if (triangles_.empty()) {
        throw TopologyError("mesh has no triangles");
    }
    for (std::size_t i = 0; i < nv; ++i) {
        if (!vertices_[i].allFinite()) {
            throw GeometryError("vertex " + std::to_string(i) + " has non-finite coordinates");
        }
    }

    // Exact duplicates: sort lexicographically and compare neighbours.
    std::vector<Index> order(nv);
    std::iota(order.begin(), order.end(), 0);
    auto lex_less = [this](Index a, Index b) {
        const Vec3& p = vertices_[static_cast<std::size_t>(a)];
        const Vec3& q = vertices_[static_cast<std::size_t>(b)];
        return std::tie(p.x(), p.y(), p.z()) < std::tie(q.x(), q.y(), q.z());
    };
    std::sort(order.begin(), order.end(), lex_less);
    for (std::size_t i = 1; i < nv; ++i) {
        if (vertices_[static_cast<std::size_t>(order[i])] == vertices_[static_cast<std::size_t>(order[i - 1])]) {
            throw GeometryError("duplicate vertices " + std::to_string(order[i - 1]) + " and " +
                                std::to_string(order[i]));
        }
    }

    std::vector<HalfEdgeRecord> records;
    records.reserve(3 * triangles_.size());
    std::vector<std::uint8_t> referenced(nv, 0);
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const Triangle& tri = triangles_[t];
        for (Index v : tri) {
            if (v < 0 || static_cast<std::size_t>(v) >= nv) {
                throw TopologyError("triangle " + std::to_string(t) + " references missing vertex " +
                                    std::to_string(v));
            }
            referenced[static_cast<std::size_t>(v)] = 1;
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0]) {
            throw GeometryError("triangle " + std::to_string(t) + " repeats a vertex");
        }
        check_triangle_geometry(vertices_[static_cast<std::size_t>(tri[0])],
                                vertices_[static_cast<std::size_t>(tri[1])],
                                vertices_[static_cast<std::size_t>(tri[2])], static_cast<Index>(t));
        for (Index i = 0; i < 3; ++i) {
            const Index a = tri[static_cast<std::size_t>((i + 1) % 3)];
            const Index b = tri[static_cast<std::size_t>((i + 2) % 3)];
            records.push_back({std::min(a, b), std::max(a, b), static_cast<Index>(t), i, a < b});
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (!referenced[v]) {
            throw TopologyError("vertex " + std::to_string(v) + " is not used by any triangle");
        }
    }

    std::sort(records.begin(), records.end(), [](const HalfEdgeRecord& a, const HalfEdgeRecord& b) {
        return std::tie(a.lo, a.hi, a.face, a.local) < std::tie(b.lo, b.hi, b.face, b.local);
    });

    triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
    on_boundary_.assign(nv, 0);
    for (std::size_t i = 0; i < records.size();) {
        std::size_t j = i;
        while (j < records.size() && records[j].lo == records[i].lo && records[j].hi == records[i].hi) {
            ++j;
        }
        const auto count = j - i;
        const std::string name = "edge (" + std::to_string(records[i].lo) + ", " + std::to_string(records[i].hi) + ")";
        if (count > 2) {
            throw TopologyError(name + " has " + std::to_string(count) + " incident triangles");
        }
        if (count == 2 && records[i].forward == records[i + 1].forward) {
            throw TopologyError(name + " is traversed in the same direction by triangles " +
                                std::to_string(records[i].face) + " and " + std::to_string(records[i + 1].face));
        }
        Edge e{{records[i].lo, records[i].hi}};
        const auto id = static_cast<Index>(edges_.size());
        for (std::size_t k = i; k < j; ++k) {
            e.faces[k - i] = records[k].face;
            triangle_edges_[static_cast<std::size_t>(records[k].face)][static_cast<std::size_t>(records[k].local)] = id;
        }
        if (e.is_boundary()) {
            on_boundary_[static_cast<std::size_t>(e.v[0])] = 1;
            on_boundary_[static_cast<std::size_t>(e.v[1])] = 1;
        }
        edges_.push_back(e);
        i = j;
    }

    for (std::size_t v = 0; v < nv; ++v) {
        if (on_boundary_[v]) {
            boundary_vertices_.push_back(static_cast<Index>(v));
        }
    }
}

double SimplicialSurface::triangle_area(Index t) const {
    const Triangle& tri = triangles_.at(static_cast<std::size_t>(t));
    return corner_area(vertices_[static_cast<std::size_t>(tri[0])], vertices_[static_cast<std::size_t>(tri[1])],
                       vertices_[static_cast<std::size_t>(tri[2])]);
}

double SimplicialSurface::total_area() const {
    double sum = 0.0;
    for (Index t = 0; t < triangle_count(); ++t) {
        sum += triangle_area(t);
    }
    return sum;
}

double SimplicialSurface::mean_edge_length() const {
    double sum = 0.0;
    for (const Edge& e : edges_) {
        sum += (vertices_[static_cast<std::size_t>(e.v[1])] - vertices_[static_cast<std::size_t>(e.v[0])]).norm();
    }
    return sum / static_cast<double>(edges_.size());
}

// ---------------------------------------------------------------------------
// OBJ

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) {
            ++i;
        }
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') {
            ++j;
        }
        if (j > i) {
            out.push_back(s.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

double parse_double(std::string_view tok, std::size_t line) {
    double value = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError(line, "malformed number '" + std::string(tok) + "'");
    }
    return value;
}

Index parse_face_index(std::string_view tok, std::size_t vertex_count, std::size_t line) {
    const auto slash = tok.find('/');
    const std::string_view head = tok.substr(0, slash);
    long long raw = 0;
    auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), raw);
    if (head.empty() || ec != std::errc() || ptr != head.data() + head.size() || raw == 0) {
        throw ParseError(line, "malformed face index '" + std::string(tok) + "'");
    }
    const long long resolved = raw > 0 ? raw - 1 : static_cast<long long>(vertex_count) + raw;
    if (resolved < 0 || resolved >= static_cast<long long>(vertex_count)) {
        throw ParseError(line, "face index " + std::to_string(raw) + " out of range");
    }
    return static_cast<Index>(resolved);
}

} // namespace

SimplicialSurface load_obj(std::istream& in) {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = trim(raw);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = trim(text.substr(0, hash));
        }
        if (text.empty()) {
            continue;
        }
        const auto tokens = split_ws(text);
        const std::string_view tag = tokens.front();
        if (tag == "v") {
            if (tokens.size() < 4 || tokens.size() > 5) {
                throw ParseError(line, "vertex record needs 3 coordinates");
            }
            vertices.emplace_back(parse_double(tokens[1], line), parse_double(tokens[2], line),
                                  parse_double(tokens[3], line));
        } else if (tag == "f") {
            if (tokens.size() < 4) {
                throw ParseError(line, "face record needs at least 3 vertices");
            }
            std::vector<Index> poly;
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                poly.push_back(parse_face_index(tokens[i], vertices.size(), line));
            }
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
                triangles.push_back({poly[0], poly[i], poly[i + 1]});
            }
        }
    }
    if (in.bad()) {
        throw IoError("failed reading OBJ stream");
    }
    return SimplicialSurface(std::move(vertices), std::move(triangles));
}

SimplicialSurface load_obj_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return load_obj(in);
}

SimplicialSurface load_obj_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_obj(in);
}

void save_obj(const SimplicialSurface& surface, std::ostream& out) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    for (const Vec3& p : surface.vertices()) {
        buf << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
    for (const Triangle& t : surface.triangles()) {
        buf << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
    out << buf.str();
    if (!out) {
        throw IoError("failed writing OBJ stream");
    }
}

void save_obj_file(const SimplicialSurface& surface, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    save_obj(surface, out);
}

// ---------------------------------------------------------------------------
// Circumcentric dual

Vec3 circumcenter(const Vec3& p, const Vec3& q, const Vec3& r) {
    const Vec3 a = p - r;
    const Vec3 b = q - r;
    const Vec3 axb = a.cross(b);
    const double denom = 2.0 * axb.squaredNorm();
    if (!(denom > 1e-24 * a.squaredNorm() * b.squaredNorm())) {
        throw GeometryError("circumcenter of collinear points");
    }
    return r + (a.squaredNorm() * b - b.squaredNorm() * a).cross(axb) / denom;
}

DualMetrics build_metrics(const SimplicialSurface& surface, const MetricsOptions& options) {
    const auto& verts = surface.vertices();
    DualMetrics m;
    m.primal_length.resize(static_cast<std::size_t>(surface.edge_count()));
    m.dual_length.assign(static_cast<std::size_t>(surface.edge_count()), 0.0);
    m.dual_area.assign(static_cast<std::size_t>(surface.vertex_count()), 0.0);

    for (std::size_t e = 0; e < surface.edges().size(); ++e) {
        const Edge& edge = surface.edges()[e];
        m.primal_length[e] = (verts[static_cast<std::size_t>(edge.v[1])] - verts[static_cast<std::size_t>(edge.v[0])]).norm();
    }

    for (Index t = 0; t < surface.triangle_count(); ++t) {
        const Triangle& tri = surface.triangles()[static_cast<std::size_t>(t)];
        const std::array<Vec3, 3> corner{verts[static_cast<std::size_t>(tri[0])], verts[static_cast<std::size_t>(tri[1])],
                                         verts[static_cast<std::size_t>(tri[2])]};
        check_triangle_geometry(corner[0], corner[1], corner[2], t);
        const Vec3 cc = circumcenter(corner[0], corner[1], corner[2]);

        // Signed circumcenter-to-midpoint distance for the edge opposite each corner.
        std::array<double, 3> offset{};
        std::array<double, 3> length{};
        for (std::size_t i = 0; i < 3; ++i) {
            const Vec3& a = corner[(i + 1) % 3];
            const Vec3& b = corner[(i + 2) % 3];
            const Vec3 mid = 0.5 * (a + b);
            const Vec3 dir = (b - a).normalized();
            Vec3 inward = corner[i] - mid;
            inward -= inward.dot(dir) * dir;
            inward.normalize();
            length[i] = (b - a).norm();
            double d = (cc - mid).dot(inward);
            if (std::abs(d) <= kDualSnapRatio * length[i]) {
                d = 0.0;
            }
            offset[i] = d;
            m.dual_length[static_cast<std::size_t>(surface.triangle_edges(t)[i])] += d;
        }
        // Corner i's quadrilateral splits into two right triangles on its two adjacent edges.
        for (std::size_t i = 0; i < 3; ++i) {
            const std::size_t left = (i + 1) % 3;
            const std::size_t right = (i + 2) % 3;
            m.dual_area[static_cast<std::size_t>(tri[i])] +=
                0.25 * (length[left] * offset[left] + length[right] * offset[right]);
        }
    }

    for (std::size_t e = 0; e < m.dual_length.size(); ++e) {
        if (m.dual_length[e] < -kNegativeDualRatio * m.primal_length[e]) {
            ++m.negative_dual_edges;
        }
    }
    if (options.strict && m.negative_dual_edges > 0) {
        throw GeometryError(std::to_string(m.negative_dual_edges) +
                            " edges have negative dual length (obtuse triangles); rejected in strict mode");
    }
    return m;
}

} // namespace decheat
