#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace decheat {

using Index = std::int32_t;
using Vec3 = Eigen::Vector3d;
using Triangle = std::array<Index, 3>;

/// Unordered vertex pair, stored with v[0] < v[1]. `faces[1]` is -1 on boundary edges.
struct Edge {
    std::array<Index, 2> v;
    std::array<Index, 2> faces{-1, -1};

    bool is_boundary() const noexcept { return faces[1] < 0; }
};

/// Oriented triangulated 2-manifold, optionally with boundary.
///
/// Instances are validated on construction and immutable afterwards:
/// every edge has one or two incident triangles, orientation agrees across
/// shared edges, no two vertices coincide and no triangle has zero area.
class SimplicialSurface {
public:
    /// Validates and builds the edge table. Throws TopologyError or GeometryError.
    SimplicialSurface(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

    const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    /// Sorted ascending.
    const std::vector<Index>& boundary_vertices() const noexcept { return boundary_vertices_; }

    Index vertex_count() const noexcept { return static_cast<Index>(vertices_.size()); }
    Index edge_count() const noexcept { return static_cast<Index>(edges_.size()); }
    Index triangle_count() const noexcept { return static_cast<Index>(triangles_.size()); }

    bool is_closed() const noexcept { return boundary_vertices_.empty(); }
    bool is_boundary_vertex(Index v) const noexcept { return on_boundary_[static_cast<std::size_t>(v)] != 0; }
    /// V - E + F.
    Index euler_characteristic() const noexcept { return vertex_count() - edge_count() + triangle_count(); }

    /// Local edge ids of triangle t, ordered so entry i is opposite corner i.
    const std::array<Index, 3>& triangle_edges(Index t) const { return triangle_edges_[static_cast<std::size_t>(t)]; }

    double triangle_area(Index t) const;
    double total_area() const;
    double mean_edge_length() const;

private:
    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> edges_;
    std::vector<std::array<Index, 3>> triangle_edges_;
    std::vector<Index> boundary_vertices_;
    std::vector<std::uint8_t> on_boundary_;
};

/// Parses ASCII OBJ (`v` and `f` records, 1-based or negative indices).
/// Polygons are fan-triangulated; `vn`, `vt`, groups and comments are ignored.
SimplicialSurface load_obj(std::istream& in);
SimplicialSurface load_obj_file(const std::string& path);
SimplicialSurface load_obj_string(std::string_view text);

/// Writes `v`/`f` records with 17 significant digits.
void save_obj(const SimplicialSurface& surface, std::ostream& out);
void save_obj_file(const SimplicialSurface& surface, const std::string& path);

/// Point in the plane of p, q, r equidistant from all three. Throws GeometryError when collinear.
Vec3 circumcenter(const Vec3& p, const Vec3& q, const Vec3& r);

/// Circumcentric dual quantities.
///
/// `dual_length[e]` sums, over the triangles incident to e, the signed distance
/// from the triangle circumcenter to the midpoint of e (negative when the
/// circumcenter is across e from the opposite corner). `dual_area[v]` sums the
/// signed corner quadrilaterals (v, edge midpoint, circumcenter, edge midpoint).
struct DualMetrics {
    std::vector<double> primal_length;
    std::vector<double> dual_length;
    std::vector<double> dual_area;
    /// Edges with dual_length below -1e-12 * primal_length.
    Index negative_dual_edges = 0;
};

struct MetricsOptions {
    /// Reject meshes with any negative dual length.
    bool strict = false;
};

/// Throws GeometryError on a degenerate triangle or, in strict mode, a
/// negative dual length. Dual areas are left signed; assemble_laplacian rejects
/// non-positive ones.
DualMetrics build_metrics(const SimplicialSurface& surface, const MetricsOptions& options = {});

} // namespace decheat
