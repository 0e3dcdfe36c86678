#pragma once

#include "decheat/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>

namespace decheat {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Vertex-to-edge incidence (E x V). Row e has -1 at edges()[e].v[0] and +1 at v[1].
struct ExteriorDerivative0 {
    SparseMatrix matrix;
};

/// Diagonal Hodge stars: star0 = dual area per vertex, star1 = dual/primal length per edge.
struct HodgeStars {
    Vector star0;
    Vector star1;
};

/// Discrete Laplacian on 0-forms, split into a symmetric stiffness part and a
/// diagonal mass part so that Laplacian = mass^-1 * stiffness.
///
/// Off-diagonal stiffness entries are w_ij = dual_length(ij) / primal_length(ij);
/// the diagonal is -sum_j w_ij, so stiffness is negative semidefinite whenever
/// every w_ij >= 0.
struct LaplaceOperator {
    SparseMatrix stiffness;
    Vector mass;

    Index size() const noexcept { return static_cast<Index>(mass.size()); }
    /// mass^-1 * stiffness * psi.
    Vector apply(const Vector& psi) const;
    /// Off-diagonal weights below -1e-12 * max |w|.
    Index negative_weight_count() const;
};

ExteriorDerivative0 assemble_d0(const SimplicialSurface& surface);

HodgeStars assemble_hodge_stars(const DualMetrics& metrics);

/// Edge-by-edge stencil assembly. Throws GeometryError if any dual area is <= 0.
LaplaceOperator assemble_laplacian(const SimplicialSurface& surface, const DualMetrics& metrics);

/// The same operator through the composition stiffness = -d0^T * star1 * d0, mass = star0.
LaplaceOperator compose_laplacian(const ExteriorDerivative0& d0, const HodgeStars& stars);

/// Independent reference built from opposite-angle cotangents,
/// w_ij = (cot alpha + cot beta) / 2, with mass from the cotangent form of the
/// circumcentric cell area, 1/8 sum_j (cot alpha + cot beta) |x_i - x_j|^2.
LaplaceOperator cotan_oracle(const SimplicialSurface& surface);

/// Coordinate-format text dump, one "row col value" line per stored entry.
void dump_coo(const SparseMatrix& matrix, std::ostream& out);

} // namespace decheat
