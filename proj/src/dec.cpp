#include "decheat/dec.hpp"

#include "decheat/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

namespace decheat {

namespace {

using Triplet = Eigen::Triplet<double, Index>;

void require_positive_mass(const Vector& mass) {
    for (Eigen::Index v = 0; v < mass.size(); ++v) {
        if (!(mass[v] > 0.0)) {
            throw GeometryError("vertex " + std::to_string(v) + " has non-positive dual area " +
                                std::to_string(mass[v]));
        }
    }
}

SparseMatrix from_edge_weights(const SimplicialSurface& surface, const std::vector<double>& weight) {
    const auto n = surface.vertex_count();
    std::vector<double> diagonal(static_cast<std::size_t>(n), 0.0);
    std::vector<Triplet> triplets;
    triplets.reserve(2 * surface.edges().size() + static_cast<std::size_t>(n));
    for (std::size_t e = 0; e < surface.edges().size(); ++e) {
        const auto [i, j] = surface.edges()[e].v;
        triplets.emplace_back(i, j, weight[e]);
        triplets.emplace_back(j, i, weight[e]);
        diagonal[static_cast<std::size_t>(i)] -= weight[e];
        diagonal[static_cast<std::size_t>(j)] -= weight[e];
    }
    for (Index v = 0; v < n; ++v) {
        triplets.emplace_back(v, v, diagonal[static_cast<std::size_t>(v)]);
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

double cot_at(const Vec3& at, const Vec3& p, const Vec3& q) {
    const Vec3 u = p - at;
    const Vec3 v = q - at;
    const double s = u.cross(v).norm();
    if (!(s > 0.0)) {
        throw GeometryError("degenerate angle in cotangent formula");
    }
    return u.dot(v) / s;
}

} // namespace

Vector LaplaceOperator::apply(const Vector& psi) const {
    return (stiffness * psi).cwiseQuotient(mass);
}

Index LaplaceOperator::negative_weight_count() const {
    double scale = 0.0;
    for (Eigen::Index r = 0; r < stiffness.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(stiffness, r); it; ++it) {
            if (it.col() != it.row()) {
                scale = std::max(scale, std::abs(it.value()));
            }
        }
    }
    Index count = 0;
    for (Eigen::Index r = 0; r < stiffness.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(stiffness, r); it; ++it) {
            if (it.col() > it.row() && it.value() < -1e-12 * scale) {
                ++count;
            }
        }
    }
    return count;
}

ExteriorDerivative0 assemble_d0(const SimplicialSurface& surface) {
    std::vector<Triplet> triplets;
    triplets.reserve(2 * surface.edges().size());
    for (std::size_t e = 0; e < surface.edges().size(); ++e) {
        const auto& edge = surface.edges()[e];
        triplets.emplace_back(static_cast<Index>(e), edge.v[0], -1.0);
        triplets.emplace_back(static_cast<Index>(e), edge.v[1], 1.0);
    }
    ExteriorDerivative0 d0{SparseMatrix(surface.edge_count(), surface.vertex_count())};
    d0.matrix.setFromTriplets(triplets.begin(), triplets.end());
    d0.matrix.makeCompressed();
    return d0;
}

HodgeStars assemble_hodge_stars(const DualMetrics& metrics) {
    HodgeStars stars;
    stars.star0 = Eigen::Map<const Vector>(metrics.dual_area.data(), static_cast<Eigen::Index>(metrics.dual_area.size()));
    stars.star1.resize(static_cast<Eigen::Index>(metrics.dual_length.size()));
    for (std::size_t e = 0; e < metrics.dual_length.size(); ++e) {
        stars.star1[static_cast<Eigen::Index>(e)] = metrics.dual_length[e] / metrics.primal_length[e];
    }
    return stars;
}

LaplaceOperator assemble_laplacian(const SimplicialSurface& surface, const DualMetrics& metrics) {
    if (metrics.dual_area.size() != static_cast<std::size_t>(surface.vertex_count()) ||
        metrics.dual_length.size() != static_cast<std::size_t>(surface.edge_count())) {
        throw ConfigError("metrics were built for a different surface");
    }
    LaplaceOperator op;
    op.mass = Eigen::Map<const Vector>(metrics.dual_area.data(), static_cast<Eigen::Index>(metrics.dual_area.size()));
    require_positive_mass(op.mass);
    std::vector<double> weight(metrics.dual_length.size());
    for (std::size_t e = 0; e < weight.size(); ++e) {
        weight[e] = metrics.dual_length[e] / metrics.primal_length[e];
    }
    op.stiffness = from_edge_weights(surface, weight);
    return op;
}

LaplaceOperator compose_laplacian(const ExteriorDerivative0& d0, const HodgeStars& stars) {
    LaplaceOperator op;
    op.mass = stars.star0;
    require_positive_mass(op.mass);
    const SparseMatrix weighted = stars.star1.asDiagonal() * d0.matrix;
    op.stiffness = -(SparseMatrix(d0.matrix.transpose()) * weighted);
    op.stiffness.makeCompressed();
    return op;
}

LaplaceOperator cotan_oracle(const SimplicialSurface& surface) {
    const auto& verts = surface.vertices();
    std::vector<double> weight(surface.edges().size(), 0.0);
    for (Index t = 0; t < surface.triangle_count(); ++t) {
        const Triangle& tri = surface.triangles()[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i < 3; ++i) {
            const Vec3& at = verts[static_cast<std::size_t>(tri[i])];
            const Vec3& p = verts[static_cast<std::size_t>(tri[(i + 1) % 3])];
            const Vec3& q = verts[static_cast<std::size_t>(tri[(i + 2) % 3])];
            weight[static_cast<std::size_t>(surface.triangle_edges(t)[i])] += 0.5 * cot_at(at, p, q);
        }
    }
    LaplaceOperator op;
    op.stiffness = from_edge_weights(surface, weight);
    op.mass = Vector::Zero(surface.vertex_count());
    for (std::size_t e = 0; e < surface.edges().size(); ++e) {
        const auto [i, j] = surface.edges()[e].v;
        const double l2 = (verts[static_cast<std::size_t>(i)] - verts[static_cast<std::size_t>(j)]).squaredNorm();
        op.mass[i] += 0.25 * weight[e] * l2;
        op.mass[j] += 0.25 * weight[e] * l2;
    }
    return op;
}

void dump_coo(const SparseMatrix& matrix, std::ostream& out) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    for (Eigen::Index r = 0; r < matrix.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
            buf << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
    out << buf.str();
    if (!out) {
        throw IoError("failed writing operator dump");
    }
}

} // namespace decheat
