#pragma once

#include "decheat/dec.hpp"

namespace decheat {

struct CgResult {
    Vector x;
    int iterations = 0;
    /// ||A x - b|| / ||b||, recomputed from x on return.
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite A.
///
/// Returns once the true relative residual is at most `tol`. Throws
/// SolverError when `max_iter` is reached, when A has a non-positive diagonal
/// entry, or when a search direction has non-positive curvature.
CgResult cg_solve(const SparseMatrix& A, const Vector& b, double tol, int max_iter);
CgResult cg_solve(const SparseMatrix& A, const Vector& b, double tol, int max_iter, const Vector& guess);

} // namespace decheat
