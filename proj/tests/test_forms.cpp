#include "cutbiot/forms.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace cutbiot;
using support::quad_form;

namespace {

MeshConfig box(int n)
{
    MeshConfig c;
    c.n = n;
    return c;
}

StabilizationParams no_penalties()
{
    StabilizationParams s;
    s.gamma_u = s.gamma_p = s.gamma_1 = s.gamma_2 = 0.0;
    return s;
}

// Volume integral of a pointwise integrand over the cut domain.
template <class F>
double integrate(const Discretization& d, F&& f)
{
    double s = 0;
    for (int c : d.active().active_cells()) {
        const CellRule& r = d.quadrature().volume(c);
        for (std::size_t q = 0; q < r.w.size(); ++q) s += r.w[q] * f(c, r.xi[q]);
    }
    return s;
}

// Boundary integral over one part.
template <class F>
double integrate_boundary(const Discretization& d, BoundaryPart part, F&& f)
{
    double s = 0;
    for (int c : d.active().cut_cells()) {
        const BoundaryRule& r = d.quadrature().boundary(c);
        for (std::size_t q = 0; q < r.size(); ++q)
            if (r.part[q] == part) s += r.w[q] * f(c, r.xi[q], r.normal[q]);
    }
    return s;
}

Mat2 grad_u(const Discretization& d, const Eigen::VectorXd& v, int c, const Vec2& xi)
{
    Mat2 g;
    g.row(0) = evaluate_gradient(d.u(), v, c, xi, 0).transpose();
    g.row(1) = evaluate_gradient(d.u(), v, c, xi, 1).transpose();
    return g;
}

Vec2 value_u(const Discretization& d, const Eigen::VectorXd& v, int c, const Vec2& xi)
{
    return {evaluate(d.u(), v, c, xi, 0), evaluate(d.u(), v, c, xi, 1)};
}

} // namespace

TEST(A1, RigidTranslationHasZeroEnergy)
{
    const Discretization d(box(4), support::whole_plane());
    const SparseMatrix A = assemble_a1(d, {}, {});
    const Eigen::VectorXd v = interpolate(d.u(), VectorFunction([](const Vec2&) -> Vec2 { return {1.5, -0.5}; }));
    EXPECT_NEAR(quad_form(A, v), 0.0, 1e-12);
}

TEST(A1, DivergenceFreeStretchOnBox)
{
    const Discretization d(box(4), support::whole_plane());
    const SparseMatrix A = assemble_a1(d, {}, {});
    const Eigen::VectorXd v = interpolate(d.u(), VectorFunction([](const Vec2& x) -> Vec2 { return {x.x(), -x.y()}; }));
    EXPECT_NEAR(quad_form(A, v), 8.0, 1e-12);
}

TEST(A1, MatchesPointwiseOracleOnCutDomain)
{
    const Discretization d(box(16), circle_minus_flower());
    const PhysicalParams p{1.7, 1.0, 1.0};
    const StabilizationParams s;
    const SparseMatrix A = assemble_a1(d, p, s);
    const double h = d.h();
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const Eigen::VectorXd v = support::random_vector(d.u().n_dofs(), seed);
        const double vol = integrate(d, [&](int c, const Vec2& xi) {
            const Mat2 g = grad_u(d, v, c, xi);
            const Mat2 e = 0.5 * (g + g.transpose());
            return p.mu * (e.array() * e.array()).sum();
        });
        const double bnd = integrate_boundary(d, BoundaryPart::Dirichlet, [&](int c, const Vec2& xi, const Vec2& n) {
            const Mat2 g = grad_u(d, v, c, xi);
            const Mat2 e = 0.5 * (g + g.transpose());
            const Vec2 u = value_u(d, v, c, xi);
            return -2.0 * p.mu * (e * n).dot(u) + s.gamma_u * p.mu / h * u.squaredNorm();
        });
        const double ref = vol + bnd;
        EXPECT_NEAR(quad_form(A, v), ref, 1e-10 * std::max(1.0, std::abs(ref)));
    }
}

TEST(B1, ConstantFieldOnClosedCircle)
{
    const Discretization d(box(16), support::circle_only());
    const SparseMatrix B = assemble_b1(d);
    const Eigen::VectorXd v = interpolate(d.u(), VectorFunction([](const Vec2&) -> Vec2 { return {0.7, -1.3}; }));
    const Eigen::VectorXd q = Eigen::VectorXd::Ones(d.pT().n_dofs());
    EXPECT_NEAR(q.dot(B * v), 0.0, 1e-12);
}

TEST(B1, LinearFieldGivesFlowerArea)
{
    const Discretization d(box(32), circle_minus_flower());
    const SparseMatrix B = assemble_b1(d);
    const Eigen::VectorXd v = interpolate(d.u(), VectorFunction([](const Vec2& x) -> Vec2 { return {x.x(), 0.0}; }));
    const Eigen::VectorXd q = Eigen::VectorXd::Ones(d.pT().n_dofs());
    EXPECT_NEAR(q.dot(B * v), support::flower_area(), 1e-3);
}

TEST(A2, MassValues)
{
    const Discretization full(box(4), support::whole_plane());
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(full.pT().n_dofs());
    EXPECT_NEAR(quad_form(assemble_a2(full, {1.0, 2.0, 1.0}), one), 2.0, 1e-13);

    const Discretization d(box(32), circle_minus_flower());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d.pT().n_dofs());
    EXPECT_NEAR(quad_form(assemble_a2(d, {}), ones), support::domain_area(), 1e-3);

    const SparseMatrix a = assemble_a2(d, {1.0, 1.0, 1.0});
    const SparseMatrix b = assemble_a2(d, {1.0, 1e8, 1.0});
    EXPECT_LE((SparseMatrix(a * 1e-8 - b)).coeffs().abs().maxCoeff(), 1e-14 * b.coeffs().abs().maxCoeff());
}

TEST(B2, MatchesMassPairing)
{
    const Discretization d(box(16), circle_minus_flower());
    const SparseMatrix B = assemble_b2(d, {1.0, 3.0, 1.0});
    const Eigen::VectorXd qT = Eigen::VectorXd::Ones(d.pT().n_dofs());
    const Eigen::VectorXd pF = Eigen::VectorXd::Ones(d.pF().n_dofs());
    EXPECT_NEAR(qT.dot(B * pF), d.quadrature().volume_measure() / 3.0, 1e-13);

    const Eigen::VectorXd a = support::random_vector(d.pF().n_dofs(), 4);
    const Eigen::VectorXd b = support::random_vector(d.pT().n_dofs(), 5);
    const double ref = integrate(d, [&](int c, const Vec2& xi) {
        return evaluate(d.pF(), a, c, xi) * evaluate(d.pT(), b, c, xi) / 3.0;
    });
    EXPECT_NEAR(b.dot(B * a), ref, 1e-10);

    const SparseMatrix tiny = assemble_b2(d, {1.0, 1e16, 1.0});
    EXPECT_LE(tiny.coeffs().abs().maxCoeff(), 1e-16 * d.h() * d.h());
}

TEST(A3, ConstantField)
{
    const Discretization d(box(16), circle_minus_flower());
    const PhysicalParams p{1.0, 4.0, 0.5};
    const StabilizationParams s;
    const A3Blocks a3 = assemble_a3(d, p, s);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(d.pF().n_dofs());
    const double gs = d.quadrature().boundary_length(BoundaryPart::Stress);
    EXPECT_NEAR(quad_form(a3.diffusion, one), s.gamma_p / d.h() * p.K * gs, 1e-10);
    EXPECT_NEAR(quad_form(a3.mass, one), 2.0 * d.quadrature().volume_measure() / p.lambda, 1e-12);
    EXPECT_NEAR(quad_form(a3.sum(), one), quad_form(a3.diffusion, one) + quad_form(a3.mass, one), 1e-12);
}

TEST(A3, LinearFieldOnBox)
{
    const Discretization d(box(4), support::whole_plane());
    const PhysicalParams p{1.0, 3.0, 1.0};
    const A3Blocks a3 = assemble_a3(d, p, {});
    const Eigen::VectorXd x = interpolate(d.pF(), ScalarFunction([](const Vec2& x) { return x.x(); }));
    EXPECT_NEAR(quad_form(a3.diffusion, x), 4.0, 1e-12);
    EXPECT_NEAR(quad_form(a3.mass, x), 2.0 / 3.0 * 4.0 / 3.0, 1e-12);
}

TEST(A3, ParameterScalingPerTerm)
{
    const Discretization d(box(16), circle_minus_flower());
    const A3Blocks unit = assemble_a3(d, {1.0, 1.0, 1.0}, {});
    const A3Blocks scaled = assemble_a3(d, {1.0, 1e8, 1e-8}, {});
    const auto rel = [](const SparseMatrix& a, const SparseMatrix& b) {
        return SparseMatrix(a - b).coeffs().abs().maxCoeff() / b.coeffs().abs().maxCoeff();
    };
    EXPECT_LE(rel(SparseMatrix(unit.diffusion * 1e-8), scaled.diffusion), 1e-14);
    EXPECT_LE(rel(SparseMatrix(unit.mass * 1e-8), scaled.mass), 1e-14);
    EXPECT_THROW(assemble_a3(d, {1.0, 1.0, -1.0}, {}), ConfigError);
}

TEST(Rhs, ZeroDataGivesZeroVector)
{
    const Discretization d(box(8), circle_minus_flower());
    const RhsBlocks r = assemble_rhs(d, {}, {}, BoundaryData::zero());
    EXPECT_EQ(r.L1.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(r.L2.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(r.L3.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Rhs, ConstantBodyForce)
{
    const Discretization d(box(16), circle_minus_flower());
    BoundaryData data = BoundaryData::zero();
    data.f = [](const Vec2&) -> Vec2 { return {2.0, -0.5}; };
    const RhsBlocks r = assemble_rhs(d, {}, {}, data);
    double sx = 0, sy = 0;
    for (int n = 0; n < d.u().n_nodes(); ++n) {
        sx += r.L1[d.u().dof(n, 0)];
        sy += r.L1[d.u().dof(n, 1)];
    }
    const double area = d.quadrature().volume_measure();
    EXPECT_NEAR(sx, 2.0 * area, 1e-12);
    EXPECT_NEAR(sy, -0.5 * area, 1e-12);
}

TEST(Rhs, BoundaryTermsMatchPointwiseOracle)
{
    const Discretization d(box(16), circle_minus_flower());
    const PhysicalParams p{1.3, 2.0, 0.7};
    const StabilizationParams s;
    BoundaryData data = BoundaryData::zero();
    data.u_D = [](const Vec2& x) -> Vec2 { return {std::sin(x.y()), x.x() * x.x()}; };
    data.g_N = [](const Vec2& x, const Vec2& n) { return x.x() + n.y(); };
    data.sigma_N = [](const Vec2& x, const Vec2& n) -> Vec2 { return {x.y() * n.x(), 1.0}; };
    data.p_FD = [](const Vec2& x) { return std::cos(x.x()); };
    const RhsBlocks r = assemble_rhs(d, p, s, data);
    const double h = d.h();
    const Eigen::VectorXd v = support::random_vector(d.u().n_dofs(), 8);
    const Eigen::VectorXd qt = support::random_vector(d.pT().n_dofs(), 9);
    const Eigen::VectorXd qf = support::random_vector(d.pF().n_dofs(), 10);
    const auto X = [&](int c, const Vec2& xi) -> Vec2 { return d.mesh().cell_origin(c) + h * xi; };

    const double l1 =
        integrate_boundary(d, BoundaryPart::Stress, [&](int c, const Vec2& xi, const Vec2& n) {
            return data.sigma_N(X(c, xi), n).dot(value_u(d, v, c, xi));
        }) +
        integrate_boundary(d, BoundaryPart::Dirichlet, [&](int c, const Vec2& xi, const Vec2& n) {
            const Mat2 g = grad_u(d, v, c, xi);
            const Mat2 e = 0.5 * (g + g.transpose());
            const Vec2 uD = data.u_D(X(c, xi));
            return -p.mu * uD.dot(e * n) + s.gamma_u * p.mu / h * uD.dot(value_u(d, v, c, xi));
        });
    const double l2 = integrate_boundary(d, BoundaryPart::Dirichlet, [&](int c, const Vec2& xi, const Vec2& n) {
        return data.u_D(X(c, xi)).dot(n) * evaluate(d.pT(), qt, c, xi);
    });
    const double l3 =
        -integrate_boundary(d, BoundaryPart::Dirichlet, [&](int c, const Vec2& xi, const Vec2& n) {
            return data.g_N(X(c, xi), n) * evaluate(d.pF(), qf, c, xi);
        }) +
        integrate_boundary(d, BoundaryPart::Stress, [&](int c, const Vec2& xi, const Vec2& n) {
            const double pd = data.p_FD(X(c, xi));
            return pd * p.K * evaluate_gradient(d.pF(), qf, c, xi).dot(n) -
                   s.gamma_p / h * p.K * pd * evaluate(d.pF(), qf, c, xi);
        });
    EXPECT_NEAR(r.L1.dot(v), l1, 1e-10 * std::max(1.0, std::abs(l1)));
    EXPECT_NEAR(r.L2.dot(qt), l2, 1e-12);
    EXPECT_NEAR(r.L3.dot(qf), l3, 1e-10 * std::max(1.0, std::abs(l3)));
}

TEST(System, SymmetricWithEmptyDisplacementFluidBlock)
{
    const Discretization d(box(16), circle_minus_flower());
    const BlockSystem sys = assemble_system(d, {1.0, 10.0, 0.1}, {}, BoundaryData::zero());
    EXPECT_LE(support::asymmetry(sys.matrix), 1e-12);
    const FieldLayout& L = sys.layout;
    EXPECT_EQ(support::block_entries(sys.matrix, L.offset_u(), L.n_u, L.offset_F(), L.n_F), 0);
    EXPECT_EQ(support::block_entries(sys.matrix, L.offset_F(), L.n_F, L.offset_u(), L.n_u), 0);
    EXPECT_TRUE(sys.stabilized);
}

TEST(System, MatchesFittedOracleOnFullBox)
{
    const Discretization d(box(3), support::whole_plane());
    const PhysicalParams p{1.3, 2.1, 0.7};
    const BlockSystem sys = assemble_system(d, p, no_penalties(), BoundaryData::zero());
    const Eigen::MatrixXd ref = support::FittedOracle(d, p).assemble();
    const Eigen::MatrixXd A(sys.matrix);
    EXPECT_LE((A - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(System, ParametersEnterLinearly)
{
    const Discretization d(box(8), circle_minus_flower());
    const StabilizationParams s;
    const SystemTerms unit = assemble_terms(d, {1, 1, 1}, s, BoundaryData::zero());
    const SystemTerms t = assemble_terms(d, {2.5, 4.0, 0.3}, s, BoundaryData::zero());
    const auto diff = [](const SparseMatrix& a, const SparseMatrix& b) {
        return SparseMatrix(a - b).coeffs().abs().maxCoeff();
    };
    EXPECT_LE(diff(t.a1, unit.a1 * 2.5), 1e-12);
    EXPECT_LE(diff(t.a2, unit.a2 / 4.0), 1e-14);
    EXPECT_LE(diff(t.b2, unit.b2 / 4.0), 1e-14);
    EXPECT_LE(diff(t.a3_1, unit.a3_1 * 0.3), 1e-12);
    EXPECT_LE(diff(t.a3_2, unit.a3_2 / 4.0), 1e-14);
    EXPECT_LE(diff(t.g1, unit.g1 * 2.5), 1e-12);
    EXPECT_LE(diff(t.g2, unit.g2), 0.0);
    EXPECT_LE(diff(t.g3_1, unit.g3_1 * 0.3), 1e-12);
    EXPECT_LE(diff(t.g3_2, unit.g3_2 / 4.0), 1e-14);
}

TEST(System, UnstabilizedDropsOnlyGhostTerms)
{
    const Discretization d(box(8), circle_minus_flower());
    StabilizationParams on, off;
    off.ghost = false;
    const SystemTerms t = assemble_terms(d, {}, on, BoundaryData::zero());
    const BlockSystem a = assemble_system(d.layout(), t, true);
    const BlockSystem b = assemble_system(d.layout(), t, false);
    EXPECT_FALSE(b.stabilized);
    const FieldLayout& L = d.layout();
    const SparseMatrix diff = a.matrix - b.matrix;
    const Eigen::MatrixXd D(diff);
    EXPECT_NEAR((D.block(0, 0, L.n_u, L.n_u) - Eigen::MatrixXd(t.g1)).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    EXPECT_NEAR((D.block(L.n_u, L.n_u, L.n_T, L.n_T) + Eigen::MatrixXd(t.g2)).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    EXPECT_EQ(assemble_system(d, {}, off, BoundaryData::zero()).stabilized, false);
}

TEST(System, CoercivityOfDiagonalBlocks)
{
    const Discretization d(box(16), circle_minus_flower());
    const PhysicalParams p;
    const StabilizationParams s;
    const SystemTerms t = assemble_terms(d, p, s, BoundaryData::zero());
    const SparseMatrix A1 = t.a1 + t.g1;
    const SparseMatrix A3 = t.a3_1 + t.a3_2 + t.g3_1 + t.g3_2;
    const double h = d.h();
    double c1 = 1e300, c3 = 1e300;
    for (unsigned seed = 0; seed < 100; ++seed) {
        const Eigen::VectorXd v = support::random_vector(d.u().n_dofs(), 100 + seed);
        const Eigen::VectorXd q = support::random_vector(d.pF().n_dofs(), 300 + seed);
        const double nv =
            integrate(d, [&](int c, const Vec2& xi) {
                const Mat2 g = grad_u(d, v, c, xi);
                const Mat2 e = 0.5 * (g + g.transpose());
                return p.mu * (e.array() * e.array()).sum();
            }) +
            integrate_boundary(d, BoundaryPart::Dirichlet, [&](int c, const Vec2& xi, const Vec2&) {
                return s.gamma_u * p.mu / h * value_u(d, v, c, xi).squaredNorm();
            });
        const double nq =
            integrate(d, [&](int c, const Vec2& xi) {
                return p.K * evaluate_gradient(d.pF(), q, c, xi).squaredNorm() +
                       std::pow(evaluate(d.pF(), q, c, xi), 2) / p.lambda;
            }) +
            integrate_boundary(d, BoundaryPart::Stress, [&](int c, const Vec2& xi, const Vec2&) {
                return s.gamma_p * p.K / h * std::pow(evaluate(d.pF(), q, c, xi), 2);
            });
        const double a1 = quad_form(A1, v), a3 = quad_form(A3, q);
        EXPECT_GE(a1, 1e-10);
        EXPECT_GE(a3, 1e-10);
        c1 = std::min(c1, a1 / nv);
        c3 = std::min(c3, a3 / nq);
    }
    EXPECT_GT(c1, 0.1);
    EXPECT_GT(c3, 0.1);
}

TEST(System, MatrixMarketDump)
{
    const Discretization d(box(4), support::whole_plane());
    const SparseMatrix A = assemble_a2(d, {});
    const auto path = std::filesystem::temp_directory_path() / "cutbiot_a2.mtx";
    write_matrix_market(A, path.string());
    std::ifstream in(path);
    std::vector<std::string> banner(5);
    for (auto& w : banner) in >> w;
    EXPECT_EQ(banner, (std::vector<std::string>{"%%MatrixMarket", "matrix", "coordinate", "real", "general"}));
    long rows = 0, cols = 0, nnz = 0;
    in >> rows >> cols >> nnz;
    EXPECT_EQ(rows, A.rows());
    EXPECT_EQ(cols, A.cols());
    EXPECT_EQ(nnz, A.nonZeros());
    std::filesystem::remove(path);
}

TEST(System, LayoutMismatchIsRejected)
{
    const Discretization d(box(4), support::whole_plane());
    SystemTerms t = assemble_terms(d, {}, {}, BoundaryData::zero());
    FieldLayout wrong = d.layout();
    wrong.n_T += 1;
    EXPECT_THROW(assemble_system(wrong, t, true), AssemblyError);
}
