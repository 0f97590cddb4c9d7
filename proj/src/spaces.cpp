#include "cutbiot/spaces.hpp"

#include <cmath>
#include <string>

namespace cutbiot {

LagrangeBasis1D::LagrangeBasis1D(int degree) : degree_(degree)
{
    if (degree < 1) throw ConfigError("Lagrange degree must be at least 1");
    const int n = degree + 1;
    coeffs_.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        // prod_{j != i} (t - t_j) / (t_i - t_j), expanded into monomials
        std::vector<double> poly{1.0};
        const double ti = double(i) / degree;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double tj = double(j) / degree;
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t p = 0; p < poly.size(); ++p) {
                next[p + 1] += poly[p] / (ti - tj);
                next[p] -= poly[p] * tj / (ti - tj);
            }
            poly = std::move(next);
        }
        coeffs_[i] = poly;
    }
}

double LagrangeBasis1D::eval(int i, double t, int d) const
{
    const auto& c = coeffs_[i];
    double s = 0.0;
    for (int p = static_cast<int>(c.size()) - 1; p >= d; --p) {
        double f = 1.0;
        for (int q = 0; q < d; ++q) f *= (p - q);
        s = s * t + f * c[p];
    }
    return s;
}

FeSpace::FeSpace(const ActiveMesh& active, int degree, int ncomp)
    : active_(&active), degree_(degree), ncomp_(ncomp), basis_(degree)
{
    if (degree < 1 || degree > 3) throw ConfigError("space degree must be 1, 2 or 3");
    if (ncomp < 1 || ncomp > 2) throw ConfigError("space must have 1 or 2 components");
    if (active.active_cells().empty()) throw ConfigError("space on an empty active mesh");

    const BackgroundMesh& mesh = active.background();
    const int k = degree_;
    const int stride = k * mesh.n() + 1;
    std::vector<int> node_id(static_cast<std::size_t>(stride) * stride, -1);
    for (int c : active.active_cells()) {
        const auto [i, j] = mesh.cell_ij(c);
        for (int jj = 0; jj <= k; ++jj)
            for (int ii = 0; ii <= k; ++ii) node_id[(k * j + jj) * stride + k * i + ii] = 0;
    }
    for (int J = 0; J < stride; ++J)
        for (int I = 0; I < stride; ++I) {
            int& id = node_id[J * stride + I];
            if (id < 0) continue;
            id = n_nodes_++;
            node_points_.push_back(mesh.box_lo() + (mesh.h() / k) * Vec2(I, J));
        }

    cell_slot_.assign(mesh.num_cells(), -1);
    const int npc = nodes_per_cell();
    cell_nodes_.reserve(active.active_cells().size() * npc);
    int slot = 0;
    for (int c : active.active_cells()) {
        cell_slot_[c] = slot++;
        const auto [i, j] = mesh.cell_ij(c);
        for (int jj = 0; jj <= k; ++jj)
            for (int ii = 0; ii <= k; ++ii)
                cell_nodes_.push_back(node_id[(k * j + jj) * stride + k * i + ii]);
    }
}

std::span<const int> FeSpace::cell_nodes(int cell) const
{
    const int s = cell_slot_[cell];
    if (s < 0) throw AssemblyError("cell " + std::to_string(cell) + " is not active");
    const int npc = nodes_per_cell();
    return {cell_nodes_.data() + static_cast<std::size_t>(s) * npc, static_cast<std::size_t>(npc)};
}

std::vector<int> FeSpace::cell_dofs(int cell) const
{
    const auto nodes = cell_nodes(cell);
    std::vector<int> dofs;
    dofs.reserve(nodes.size() * ncomp_);
    for (int n : nodes)
        for (int c = 0; c < ncomp_; ++c) dofs.push_back(dof(n, c));
    return dofs;
}

ShapeValues FeSpace::eval(const Vec2& xi) const
{
    const int n1 = degree_ + 1;
    double vx[4], vy[4], dx[4], dy[4];
    for (int i = 0; i < n1; ++i) {
        vx[i] = basis_.eval(i, xi.x());
        vy[i] = basis_.eval(i, xi.y());
        dx[i] = basis_.eval(i, xi.x(), 1);
        dy[i] = basis_.eval(i, xi.y(), 1);
    }
    const double inv_h = 1.0 / h();
    ShapeValues sv;
    sv.values.resize(n1 * n1);
    sv.grads.resize(n1 * n1, 2);
    for (int jj = 0; jj < n1; ++jj)
        for (int ii = 0; ii < n1; ++ii) {
            const int a = jj * n1 + ii;
            sv.values[a] = vx[ii] * vy[jj];
            sv.grads(a, 0) = dx[ii] * vy[jj] * inv_h;
            sv.grads(a, 1) = vx[ii] * dy[jj] * inv_h;
        }
    return sv;
}

double FeSpace::shape_derivative(int a, const Vec2& xi, int dx, int dy) const
{
    const int n1 = degree_ + 1;
    const int ii = a % n1, jj = a / n1;
    return basis_.eval(ii, xi.x(), dx) * basis_.eval(jj, xi.y(), dy) / std::pow(h(), dx + dy);
}

Eigen::VectorXd interpolate(const FeSpace& space, const ScalarFunction& f)
{
    if (space.ncomp() != 1) throw ConfigError("scalar interpolation into a vector space");
    Eigen::VectorXd v(space.n_dofs());
    for (int n = 0; n < space.n_nodes(); ++n) v[n] = f(space.node_point(n));
    return v;
}

Eigen::VectorXd interpolate(const FeSpace& space, const VectorFunction& f)
{
    if (space.ncomp() != 2) throw ConfigError("vector interpolation into a scalar space");
    Eigen::VectorXd v(space.n_dofs());
    for (int n = 0; n < space.n_nodes(); ++n) {
        const Vec2 fx = f(space.node_point(n));
        v[space.dof(n, 0)] = fx.x();
        v[space.dof(n, 1)] = fx.y();
    }
    return v;
}

double evaluate(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& coeffs, int cell,
                const Vec2& xi, int comp)
{
    const ShapeValues sv = space.eval(xi);
    const auto nodes = space.cell_nodes(cell);
    double s = 0.0;
    for (std::size_t a = 0; a < nodes.size(); ++a) s += sv.values[a] * coeffs[space.dof(nodes[a], comp)];
    return s;
}

Vec2 evaluate_gradient(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                       int cell, const Vec2& xi, int comp)
{
    const ShapeValues sv = space.eval(xi);
    const auto nodes = space.cell_nodes(cell);
    Vec2 g = Vec2::Zero();
    for (std::size_t a = 0; a < nodes.size(); ++a)
        g += sv.grads.row(a).transpose() * coeffs[space.dof(nodes[a], comp)];
    return g;
}

FieldLayout make_layout(const FeSpace& u, const FeSpace& pT, const FeSpace& pF)
{
    if (u.ncomp() != 2 || pT.ncomp() != 1 || pF.ncomp() != 1)
        throw AssemblyError("layout: expected (vector, scalar, scalar) spaces");
    return FieldLayout{u.n_dofs(), pT.n_dofs(), pF.n_dofs()};
}

} // namespace cutbiot
