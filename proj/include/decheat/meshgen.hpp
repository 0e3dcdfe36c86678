#pragma once

#include "decheat/mesh.hpp"

#include <cstdint>

namespace decheat::meshgen {

/// One triangle with corners (0,0,0), (1,0,0), (0,1,0).
SimplicialSurface single_triangle();

/// Six equilateral triangles of side `side` around a center vertex at the
/// origin (vertex 0); ring vertex k sits at angle k * 60 degrees.
SimplicialSurface hex_patch(double side = 1.0);

/// Structured grid on [0,1]^2 with `cells` cells per side, each cell split
/// along its (i,j)-(i+1,j+1) diagonal. Vertex (i, j) has index j * (cells + 1) + i.
SimplicialSurface unit_square(int cells);

/// Irregular Delaunay triangulation of [0,1]^2: a `cells` grid whose interior
/// vertices are jittered by up to `jitter * h` per axis, then edge-flipped
/// until every interior edge satisfies the empty-circumcircle condition.
SimplicialSurface delaunay_square(int cells, std::uint64_t seed, double jitter = 0.2);

/// Torus of radii `major` > `minor` from a staggered lattice with
/// `n_major` columns around the central axis and `n_minor` (even) rows.
SimplicialSurface torus(double major, double minor, int n_major, int n_minor);

} // namespace decheat::meshgen
