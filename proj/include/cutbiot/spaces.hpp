#pragma once

#include "cutbiot/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

namespace cutbiot {

/// Lagrange polynomials on equispaced nodes of [0,1], stored as monomial
/// coefficients so that derivatives of any order are cheap.
class LagrangeBasis1D {
public:
    explicit LagrangeBasis1D(int degree);

    int degree() const { return degree_; }
    /// d-th derivative of the i-th basis polynomial at t.
    double eval(int i, double t, int d = 0) const;

private:
    int degree_;
    std::vector<std::vector<double>> coeffs_;
};

/// Values and physical gradients of all cell-local scalar shape functions.
struct ShapeValues {
    Eigen::VectorXd values;
    Eigen::MatrixX2d grads;
};

/// Continuous tensor-product Q_k space (scalar or 2-vector) on the active mesh.
/// Nodes of the (kN+1)^2 grid that touch an active cell carry dofs, numbered
/// lexicographically (y-major) by node coordinate. Vector dofs are
/// interleaved: dof = node * ncomp + comp.
class FeSpace {
public:
    FeSpace(const ActiveMesh& active, int degree, int ncomp);

    int degree() const { return degree_; }
    int ncomp() const { return ncomp_; }
    int n_nodes() const { return n_nodes_; }
    int n_dofs() const { return n_nodes_ * ncomp_; }
    int nodes_per_cell() const { return (degree_ + 1) * (degree_ + 1); }
    int dofs_per_cell() const { return nodes_per_cell() * ncomp_; }
    double h() const { return active_->background().h(); }
    const ActiveMesh& active() const { return *active_; }

    /// Global node ids of an active cell, local order a = jj * (k+1) + ii.
    std::span<const int> cell_nodes(int cell) const;
    /// Global dofs of an active cell, local order a * ncomp + comp.
    std::vector<int> cell_dofs(int cell) const;
    int dof(int node, int comp) const { return node * ncomp_ + comp; }
    const Vec2& node_point(int node) const { return node_points_[node]; }

    /// Shape function values and physical gradients at reference point xi.
    /// xi may lie outside [0,1]^2 (polynomial extrapolation).
    ShapeValues eval(const Vec2& xi) const;
    /// Physical derivative d^dx/dx^dx d^dy/dy^dy of local shape function a.
    double shape_derivative(int a, const Vec2& xi, int dx, int dy) const;

private:
    const ActiveMesh* active_;
    int degree_, ncomp_;
    int n_nodes_ = 0;
    LagrangeBasis1D basis_;
    std::vector<int> cell_slot_;
    std::vector<int> cell_nodes_;
    std::vector<Vec2> node_points_;
};

/// eval_basis for a cell: the mesh is uniform, so the result only depends on xi.
inline ShapeValues eval_basis(const FeSpace& space, int /*cell*/, const Vec2& xi)
{
    return space.eval(xi);
}

using ScalarFunction = std::function<double(const Vec2&)>;
using VectorFunction = std::function<Vec2(const Vec2&)>;

/// Nodal interpolation of a globally defined function.
Eigen::VectorXd interpolate(const FeSpace& space, const ScalarFunction& f);
Eigen::VectorXd interpolate(const FeSpace& space, const VectorFunction& f);

/// Evaluate component `comp` of a discrete function at reference point xi of `cell`.
double evaluate(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& coeffs, int cell,
                const Vec2& xi, int comp = 0);
Vec2 evaluate_gradient(const FeSpace& space, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                       int cell, const Vec2& xi, int comp = 0);

/// Position of the displacement, total pressure and fluid pressure blocks in
/// the global vector.
struct FieldLayout {
    int n_u = 0; // displacement dofs (2 per node)
    int n_T = 0;
    int n_F = 0;

    int offset_u() const { return 0; }
    int offset_T() const { return n_u; }
    int offset_F() const { return n_u + n_T; }
    int total() const { return n_u + n_T + n_F; }
};

FieldLayout make_layout(const FeSpace& u, const FeSpace& pT, const FeSpace& pF);

} // namespace cutbiot
