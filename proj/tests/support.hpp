#pragma once

// Helpers shared by the unit tests and the acceptance binary: independent
// reference assemblies and small utilities.

#include "cutbiot/forms.hpp"
#include "cutbiot/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <random>
#include <utility>

namespace cutbiot::support {

inline Eigen::VectorXd random_vector(long n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

inline double quad_form(const SparseMatrix& A, const Eigen::VectorXd& v) { return v.dot(A * v); }

inline LevelSetDomain whole_plane() { return LevelSetDomain{constant_levelset(-1.0), std::nullopt}; }

inline LevelSetDomain circle_only(double radius = 0.95)
{
    return LevelSetDomain{circle_levelset(Vec2::Zero(), radius), std::nullopt};
}

/// Mass (grad = false) or stiffness (grad = true) matrix of a scalar space
/// integrated over the full active cells, with a plain tensor Gauss rule.
inline SparseMatrix full_cell_matrix(const FeSpace& s, bool grad)
{
    const BackgroundMesh& mesh = s.active().background();
    const Rule2D rule = tensor_gauss(2 * s.degree() + 1);
    const double area = mesh.h() * mesh.h();
    std::vector<Eigen::Triplet<double>> t;
    for (int c : s.active().active_cells()) {
        const auto nodes = s.cell_nodes(c);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const ShapeValues sv = s.eval(rule.points[q]);
            const double w = rule.weights[q] * area;
            for (std::size_t a = 0; a < nodes.size(); ++a)
                for (std::size_t b = 0; b < nodes.size(); ++b) {
                    const double v = grad ? sv.grads.row(a).dot(sv.grads.row(b)) : sv.values[a] * sv.values[b];
                    t.emplace_back(nodes[a], nodes[b], w * v);
                }
        }
    }
    SparseMatrix m(s.n_dofs(), s.n_dofs());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

/// Same as full_cell_matrix but restricted to the given cells.
inline SparseMatrix cells_matrix(const FeSpace& s, const std::vector<int>& cells, bool grad)
{
    const BackgroundMesh& mesh = s.active().background();
    const Rule2D rule = tensor_gauss(2 * s.degree() + 1);
    const double area = mesh.h() * mesh.h();
    std::vector<Eigen::Triplet<double>> t;
    for (int c : cells) {
        const auto nodes = s.cell_nodes(c);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const ShapeValues sv = s.eval(rule.points[q]);
            const double w = rule.weights[q] * area;
            for (std::size_t a = 0; a < nodes.size(); ++a)
                for (std::size_t b = 0; b < nodes.size(); ++b) {
                    const double v = grad ? sv.grads.row(a).dot(sv.grads.row(b)) : sv.values[a] * sv.values[b];
                    t.emplace_back(nodes[a], nodes[b], w * v);
                }
        }
    }
    SparseMatrix m(s.n_dofs(), s.n_dofs());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

/// Textbook fitted assembly of the three-field Biot matrix on the full box
/// (natural boundary conditions, no penalties), dense. Q_k / Q_{k-1} / Q_l
/// Lagrange elements with their own basis code and a 4-point Gauss rule.
/// Rows and columns follow the library's layout, matched by node coordinates.
class FittedOracle {
public:
    FittedOracle(const Discretization& d, const PhysicalParams& p) : d_(d), p_(p) {}

    Eigen::MatrixXd assemble() const
    {
        const FieldLayout& L = d_.layout();
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L.total(), L.total());
        const BackgroundMesh& mesh = d_.mesh();
        const double h = mesh.h();
        const int k = d_.u().degree(), kt = d_.pT().degree(), l = d_.pF().degree();
        const auto map_u = node_map(d_.u()), map_t = node_map(d_.pT()), map_f = node_map(d_.pF());
        // 4-point Gauss-Legendre on [0, 1]
        const double g1 = 0.5 - 0.5 * 0.8611363115940526, g2 = 0.5 - 0.5 * 0.3399810435848563;
        const double w1 = 0.5 * 0.3478548451374538, w2 = 0.5 * 0.6521451548625461;
        const double gp[4] = {g1, g2, 1.0 - g2, 1.0 - g1};
        const double gw[4] = {w1, w2, w2, w1};

        for (int c = 0; c < mesh.num_cells(); ++c) {
            const auto [ci, cj] = mesh.cell_ij(c);
            for (int qy = 0; qy < 4; ++qy)
                for (int qx = 0; qx < 4; ++qx) {
                    const double w = gw[qx] * gw[qy] * h * h;
                    const auto U = tabulate(k, gp[qx], gp[qy], h);
                    const auto T = tabulate(kt, gp[qx], gp[qy], h);
                    const auto F = tabulate(l, gp[qx], gp[qy], h);
                    const auto gu = global(map_u, k, ci, cj);
                    const auto gt = global(map_t, kt, ci, cj);
                    const auto gf = global(map_f, l, ci, cj);
                    const int ou = L.offset_u(), oT = L.offset_T(), oF = L.offset_F();
                    // displacement: vector basis phi_a e_c
                    for (std::size_t a = 0; a < U.size(); ++a)
                        for (int ca = 0; ca < 2; ++ca) {
                            const Mat2 Ea = strain(U[a], ca);
                            const double diva = U[a].second[ca];
                            const int ia = ou + 2 * gu[a] + ca;
                            for (std::size_t b = 0; b < U.size(); ++b)
                                for (int cb = 0; cb < 2; ++cb) {
                                    const Mat2 Eb = strain(U[b], cb);
                                    A(ia, ou + 2 * gu[b] + cb) += w * p_.mu * (Ea.array() * Eb.array()).sum();
                                }
                            for (std::size_t t = 0; t < T.size(); ++t) {
                                const double v = -w * diva * T[t].first;
                                A(oT + gt[t], ia) += v;
                                A(ia, oT + gt[t]) += v;
                            }
                        }
                    for (std::size_t s = 0; s < T.size(); ++s) {
                        for (std::size_t t = 0; t < T.size(); ++t)
                            A(oT + gt[s], oT + gt[t]) -= w * T[s].first * T[t].first / p_.lambda;
                        for (std::size_t f = 0; f < F.size(); ++f) {
                            const double v = w * T[s].first * F[f].first / p_.lambda;
                            A(oT + gt[s], oF + gf[f]) += v;
                            A(oF + gf[f], oT + gt[s]) += v;
                        }
                    }
                    for (std::size_t e = 0; e < F.size(); ++e)
                        for (std::size_t f = 0; f < F.size(); ++f)
                            A(oF + gf[e], oF + gf[f]) -=
                                w * (p_.K * F[e].second.dot(F[f].second) +
                                     2.0 / p_.lambda * F[e].first * F[f].first);
                }
        }
        return A;
    }

private:
    using Shape = std::pair<double, Vec2>; // value, physical gradient

    // Lagrange polynomial i on nodes j/deg and its derivative, product form.
    static double lag(int deg, int i, double t)
    {
        double v = 1.0;
        for (int j = 0; j <= deg; ++j)
            if (j != i) v *= (t - double(j) / deg) / (double(i - j) / deg);
        return v;
    }
    static double dlag(int deg, int i, double t)
    {
        double s = 0.0;
        for (int m = 0; m <= deg; ++m) {
            if (m == i) continue;
            double v = 1.0 / (double(i - m) / deg);
            for (int j = 0; j <= deg; ++j)
                if (j != i && j != m) v *= (t - double(j) / deg) / (double(i - j) / deg);
            s += v;
        }
        return s;
    }

    static std::vector<Shape> tabulate(int deg, double x, double y, double h)
    {
        std::vector<Shape> out;
        for (int jj = 0; jj <= deg; ++jj)
            for (int ii = 0; ii <= deg; ++ii)
                out.emplace_back(lag(deg, ii, x) * lag(deg, jj, y),
                                 Vec2(dlag(deg, ii, x) * lag(deg, jj, y), lag(deg, ii, x) * dlag(deg, jj, y)) / h);
        return out;
    }

    static Mat2 strain(const Shape& s, int comp)
    {
        Mat2 g = Mat2::Zero();
        g.row(comp) = s.second.transpose();
        return 0.5 * (g + g.transpose());
    }

    std::map<std::pair<int, int>, int> node_map(const FeSpace& s) const
    {
        std::map<std::pair<int, int>, int> m;
        const double hn = d_.mesh().h() / s.degree();
        for (int n = 0; n < s.n_nodes(); ++n) {
            const Vec2 r = (s.node_point(n) - d_.mesh().box_lo()) / hn;
            m[{int(std::lround(r.x())), int(std::lround(r.y()))}] = n;
        }
        return m;
    }

    static std::vector<int> global(const std::map<std::pair<int, int>, int>& m, int deg, int ci, int cj)
    {
        std::vector<int> g;
        for (int jj = 0; jj <= deg; ++jj)
            for (int ii = 0; ii <= deg; ++ii) g.push_back(m.at({deg * ci + ii, deg * cj + jj}));
        return g;
    }

    const Discretization& d_;
    PhysicalParams p_;
};

/// Relative asymmetry max|A - A^T| / max|A|.
inline double asymmetry(const SparseMatrix& A)
{
    const SparseMatrix D = A - SparseMatrix(A.transpose());
    const double amax = A.coeffs().abs().maxCoeff();
    return D.nonZeros() ? D.coeffs().abs().maxCoeff() / amax : 0.0;
}

/// Number of stored entries of A in the (rows r0.., cols c0..) block.
inline long block_entries(const SparseMatrix& A, int r0, int nr, int c0, int nc)
{
    long n = 0;
    for (int k = c0; k < c0 + nc; ++k)
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
            if (it.row() >= r0 && it.row() < r0 + nr) ++n;
    return n;
}

/// Analytic areas and lengths of the circle-minus-flower domain.
inline double flower_area(double r0 = 0.7, double r1 = 0.18) { return M_PI * (r0 * r0 + 0.5 * r1 * r1); }
inline double domain_area(double radius = 0.95) { return M_PI * radius * radius - flower_area(); }

/// Composite Simpson rule of the polar arclength integrand.
inline double flower_length(double r0 = 0.7, double r1 = 0.18, int m = 5, int n = 200000)
{
    auto f = [&](double t) {
        const double r = r0 + r1 * std::cos(m * t);
        const double dr = -m * r1 * std::sin(m * t);
        return std::sqrt(r * r + dr * dr);
    };
    const double a = 0.0, b = 2.0 * M_PI, hh = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * hh);
    return s * hh / 3.0;
}

} // namespace cutbiot::support
