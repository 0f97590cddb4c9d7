#include "cutbiot/solver.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

namespace cutbiot {

namespace {

using Clock = std::chrono::steady_clock;
using Lu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                    Eigen::VectorXd& r)
{
    r = b - A * x;
    const double bn = b.lpNorm<Eigen::Infinity>();
    return r.lpNorm<Eigen::Infinity>() / (bn > 0.0 ? bn : 1.0);
}

long worst_row(const Eigen::VectorXd& r)
{
    if (r.size() == 0) return -1;
    long best = 0;
    double v = -1.0;
    for (long i = 0; i < r.size(); ++i) {
        const double a = std::isfinite(r[i]) ? std::abs(r[i]) : std::numeric_limits<double>::infinity();
        if (a > v) {
            v = a;
            best = i;
        }
    }
    return best;
}

// Power iteration on A and inverse iteration through `lu`.
double condition_from(const SparseMatrix& A, const Lu& lu, int iterations, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd x0(A.rows());
    for (long i = 0; i < x0.size(); ++i) x0[i] = dist(rng);
    x0.normalize();

    Eigen::VectorXd x = x0;
    double big = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd y = A * x;
        big = y.norm();
        if (big == 0.0) return std::numeric_limits<double>::infinity();
        x = y / big;
    }
    x = x0;
    double inv_small = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd y = lu.solve(x);
        inv_small = y.norm();
        if (!std::isfinite(inv_small) || inv_small == 0.0) return std::numeric_limits<double>::infinity();
        x = y / inv_small;
    }
    return big * inv_small;
}

} // namespace

SolveReport solve(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverOptions& opts)
{
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw SolverError("solve: dimension mismatch");
    SolveReport rep;
    rep.stats.n = A.rows();
    rep.stats.nnz = A.nonZeros();

    auto t0 = Clock::now();
    Lu lu;
    lu.compute(A);
    rep.stats.factor_seconds = seconds_since(t0);
    if (lu.info() != Eigen::Success)
        throw SolverError("LU factorization failed: " + lu.lastErrorMessage());

    t0 = Clock::now();
    rep.x = lu.solve(b);
    Eigen::VectorXd r;
    if (lu.info() != Eigen::Success || !rep.x.allFinite())
        throw SolverError("LU solve produced a non-finite solution", worst_row(b - A * rep.x));
    rep.relative_residual = rel_residual(A, rep.x, b, r);
    for (int it = 0; it < opts.max_refinement && rep.relative_residual > 1e-15; ++it) {
        const Eigen::VectorXd dx = lu.solve(r);
        if (!dx.allFinite()) break;
        Eigen::VectorXd x1 = rep.x + dx, r1;
        const double res1 = rel_residual(A, x1, b, r1);
        if (!(res1 < rep.relative_residual)) break;
        rep.x = std::move(x1);
        r = std::move(r1);
        rep.relative_residual = res1;
        ++rep.stats.refinement_steps;
    }
    rep.stats.solve_seconds = seconds_since(t0);
    if (!std::isfinite(rep.relative_residual) || rep.relative_residual > opts.residual_tol) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "relative residual %.3e exceeds tolerance %.1e", rep.relative_residual,
                      opts.residual_tol);
        throw SolverError(buf, worst_row(r));
    }
    if (opts.condition_iterations > 0)
        rep.kappa = condition_from(A, lu, opts.condition_iterations, opts.condition_seed);
    return rep;
}

SolveReport solve(const BlockSystem& system, const SolverOptions& opts)
{
    return solve(system.matrix, system.rhs, opts);
}

double estimate_condition(const SparseMatrix& A, int iterations, unsigned seed)
{
    if (A.rows() != A.cols() || A.rows() == 0) throw SolverError("condition: matrix must be square");
    Lu lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("LU factorization failed: " + lu.lastErrorMessage());
    return condition_from(A, lu, iterations, seed);
}

} // namespace cutbiot
