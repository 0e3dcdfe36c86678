#include "decheat/meshgen.hpp"

#include "decheat/errors.hpp"
#include "decheat/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

namespace decheat::meshgen {

SimplicialSurface single_triangle() {
    return SimplicialSurface({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}});
}

SimplicialSurface hex_patch(double side) {
    std::vector<Vec3> verts{Vec3::Zero()};
    for (int k = 0; k < 6; ++k) {
        const double a = k * std::numbers::pi / 3.0;
        verts.emplace_back(side * std::cos(a), side * std::sin(a), 0.0);
    }
    std::vector<Triangle> tris;
    for (Index k = 0; k < 6; ++k) {
        tris.push_back({0, 1 + k, 1 + (k + 1) % 6});
    }
    return SimplicialSurface(std::move(verts), std::move(tris));
}

namespace {

std::vector<Triangle> grid_triangles(int cells) {
    std::vector<Triangle> tris;
    const Index row = cells + 1;
    for (Index j = 0; j < cells; ++j) {
        for (Index i = 0; i < cells; ++i) {
            const Index v00 = j * row + i;
            const Index v10 = v00 + 1;
            const Index v01 = v00 + row;
            const Index v11 = v01 + 1;
            tris.push_back({v00, v10, v11});
            tris.push_back({v00, v11, v01});
        }
    }
    return tris;
}

std::vector<Vec3> grid_vertices(int cells) {
    std::vector<Vec3> verts;
    for (int j = 0; j <= cells; ++j) {
        for (int i = 0; i <= cells; ++i) {
            verts.emplace_back(static_cast<double>(i) / cells, static_cast<double>(j) / cells, 0.0);
        }
    }
    return verts;
}

double corner_angle(const Vec3& at, const Vec3& p, const Vec3& q) {
    const Vec3 u = (p - at).normalized();
    const Vec3 v = (q - at).normalized();
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

// One pass of Lawson flipping; returns true if an edge was flipped.
bool flip_one(const std::vector<Vec3>& verts, std::vector<Triangle>& tris) {
    std::map<std::pair<Index, Index>, std::array<int, 2>> owner; // directed edge -> (face, corner opposite)
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        for (int i = 0; i < 3; ++i) {
            owner[{tris[t][(i + 1) % 3], tris[t][(i + 2) % 3]}] = {t, i};
        }
    }
    for (const auto& [key, fc] : owner) {
        const auto [a, b] = key;
        if (a > b) {
            continue;
        }
        const auto twin = owner.find({b, a});
        if (twin == owner.end()) {
            continue;
        }
        const Index c = tris[fc[0]][fc[1]];
        const Index d = tris[twin->second[0]][twin->second[1]];
        const auto& P = verts;
        const double opposite = corner_angle(P[c], P[a], P[b]) + corner_angle(P[d], P[a], P[b]);
        if (opposite > std::numbers::pi + 1e-10) {
            tris[fc[0]] = {a, d, c};
            tris[twin->second[0]] = {d, b, c};
            return true;
        }
    }
    return false;
}

} // namespace

SimplicialSurface unit_square(int cells) {
    if (cells < 1) {
        throw ConfigError("unit_square needs at least one cell");
    }
    return SimplicialSurface(grid_vertices(cells), grid_triangles(cells));
}

SimplicialSurface delaunay_square(int cells, std::uint64_t seed, double jitter) {
    if (cells < 1 || jitter < 0.0 || jitter > 0.25) {
        throw ConfigError("delaunay_square needs cells >= 1 and jitter in [0, 0.25]");
    }
    Rng rng(seed);
    auto verts = grid_vertices(cells);
    const double h = 1.0 / cells;
    for (int j = 1; j < cells; ++j) {
        for (int i = 1; i < cells; ++i) {
            Vec3& p = verts[static_cast<std::size_t>(j * (cells + 1) + i)];
            p.x() += rng.uniform(-jitter, jitter) * h;
            p.y() += rng.uniform(-jitter, jitter) * h;
        }
    }
    auto tris = grid_triangles(cells);
    // Each flip strictly increases the minimum angle sequence, so this terminates.
    while (flip_one(verts, tris)) {
    }
    return SimplicialSurface(std::move(verts), std::move(tris));
}

SimplicialSurface torus(double major, double minor, int n_major, int n_minor) {
    if (!(major > minor && minor > 0.0) || n_major < 3 || n_minor < 4 || n_minor % 2 != 0) {
        throw ConfigError("torus needs major > minor > 0, n_major >= 3 and even n_minor >= 4");
    }
    std::vector<Vec3> verts;
    for (int j = 0; j < n_minor; ++j) {
        const double v = 2.0 * std::numbers::pi * j / n_minor;
        for (int i = 0; i < n_major; ++i) {
            const double u = 2.0 * std::numbers::pi * (i + 0.5 * (j % 2)) / n_major;
            const double ring = major + minor * std::cos(v);
            verts.emplace_back(ring * std::cos(u), ring * std::sin(u), minor * std::sin(v));
        }
    }
    auto id = [&](int i, int j) { return static_cast<Index>(((j + n_minor) % n_minor) * n_major + (i + n_major) % n_major); };
    std::vector<Triangle> tris;
    for (int j = 0; j < n_minor; ++j) {
        for (int i = 0; i < n_major; ++i) {
            if (j % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i, j + 1), id(i + 1, j), id(i + 1, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    }
    return SimplicialSurface(std::move(verts), std::move(tris));
}

} // namespace decheat::meshgen
