#include "decheat/solver.hpp"

#include "decheat/errors.hpp"

#include <cmath>
#include <string>

namespace decheat {

CgResult cg_solve(const SparseMatrix& A, const Vector& b, double tol, int max_iter) {
    return cg_solve(A, b, tol, max_iter, Vector::Zero(b.size()));
}

CgResult cg_solve(const SparseMatrix& A, const Vector& b, double tol, int max_iter, const Vector& guess) {
    if (A.rows() != A.cols() || A.rows() != b.size() || guess.size() != b.size()) {
        throw ConfigError("cg_solve: dimension mismatch");
    }
    if (!(tol > 0.0 && tol < 1.0) || max_iter < 1) {
        throw ConfigError("cg_solve: need tol in (0, 1) and max_iter >= 1");
    }
    const Vector diag = A.diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag[i] > 0.0)) {
            throw SolverError("system matrix is not positive definite (diagonal entry " + std::to_string(i) +
                              " = " + std::to_string(diag[i]) + ")");
        }
    }
    const Vector inv_diag = diag.cwiseInverse();

    CgResult result;
    const double b_norm = b.stableNorm();
    if (b_norm == 0.0) {
        result.x = Vector::Zero(b.size());
        return result;
    }
    // Work on the unit-norm system so tiny fields cannot underflow the recurrences.
    const Vector rhs = b / b_norm;
    result.x = guess / b_norm;
    Vector r = rhs - A * result.x;
    result.relative_residual = r.norm();

    // Restart from the true residual if the recursive one drifted below tolerance early.
    while (result.relative_residual > tol) {
        Vector z = inv_diag.cwiseProduct(r);
        Vector p = z;
        double rz = r.dot(z);
        while (true) {
            if (result.iterations >= max_iter) {
                throw SolverError("conjugate gradients did not converge in " + std::to_string(max_iter) +
                                  " iterations (relative residual " + std::to_string(r.norm()) + ")");
            }
            const Vector Ap = A * p;
            const double curvature = p.dot(Ap);
            if (!(curvature > 0.0)) {
                throw SolverError("conjugate gradient breakdown: non-positive curvature " + std::to_string(curvature));
            }
            const double alpha = rz / curvature;
            result.x += alpha * p;
            r -= alpha * Ap;
            ++result.iterations;
            if (r.norm() <= tol) {
                break;
            }
            z = inv_diag.cwiseProduct(r);
            const double rz_next = r.dot(z);
            p = z + (rz_next / rz) * p;
            rz = rz_next;
        }
        r = rhs - A * result.x;
        result.relative_residual = r.norm();
    }
    result.x *= b_norm;
    return result;
}

} // namespace decheat
