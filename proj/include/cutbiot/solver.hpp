#pragma once

#include "cutbiot/forms.hpp"

#include <optional>

namespace cutbiot {

struct SolverOptions {
    double residual_tol = 1e-9; // on ||A x - b||_inf / ||b||_inf
    int max_refinement = 3;
    int condition_iterations = 0; // > 0: also estimate kappa with the same factorization
    unsigned condition_seed = 12345;
};

struct SolverStats {
    long n = 0;
    long nnz = 0;
    int refinement_steps = 0;
    double factor_seconds = 0.0;
    double solve_seconds = 0.0;
};

struct SolveReport {
    Eigen::VectorXd x;
    double relative_residual = 0.0;
    SolverStats stats;
    std::optional<double> kappa;
};

/// Sparse LU with partial pivoting and a few steps of iterative refinement. Throws
/// SolverError if the factorization breaks down, the solution is not finite
/// or the final relative residual exceeds `opts.residual_tol`.
SolveReport solve(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverOptions& opts = {});
SolveReport solve(const BlockSystem& system, const SolverOptions& opts = {});

/// 2-norm condition number estimate of a symmetric matrix: power iteration
/// for the largest and inverse iteration (through an LU factorization) for
/// the smallest eigenvalue magnitude. Deterministic for a fixed seed.
/// Throws SolverError if A is numerically singular.
double estimate_condition(const SparseMatrix& A, int iterations = 100, unsigned seed = 12345);

} // namespace cutbiot
