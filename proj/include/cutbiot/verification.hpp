#pragma once

#include "cutbiot/forms.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cutbiot {

/// Closed-form exact fields with the derivatives needed for forcing, boundary
/// data and error norms. Gradients are Jacobians: grad_u(x)(i, j) = d u_i / d x_j.
struct ManufacturedCase {
    std::string id;
    PhysicalParams params;

    VectorFunction u;
    std::function<Mat2(const Vec2&)> grad_u;
    VectorFunction div_eps_u; // div of the symmetric gradient
    ScalarFunction div_u;
    VectorFunction grad_div_u;
    ScalarFunction p_F;
    VectorFunction grad_p_F;
    ScalarFunction lap_p_F;

    double p_T(const Vec2& x) const { return p_F(x) - params.lambda * div_u(x); }
    Vec2 grad_p_T(const Vec2& x) const { return grad_p_F(x) - params.lambda * grad_div_u(x); }
    Mat2 eps_u(const Vec2& x) const
    {
        const Mat2 g = grad_u(x);
        return 0.5 * (g + g.transpose());
    }

    Vec2 f(const Vec2& x) const { return -params.mu * div_eps_u(x) + grad_p_T(x); }
    double g(const Vec2& x) const
    {
        return p_T(x) / params.lambda - 2.0 * p_F(x) / params.lambda + params.K * lap_p_F(x);
    }

    /// Forcing and boundary data traced from the exact fields.
    BoundaryData data() const;
};

/// "divfree": u = (cos pi y, sin pi x), p_F = sin pi x sin pi y (divergence free).
/// "variant": u = (cos pi y + x^2, sin pi x), same p_F; div u = 2x so p_T
/// depends on lambda.
ManufacturedCase make_case(const std::string& id, const PhysicalParams& params);

struct ErrorReport {
    double h = 0.0;
    PhysicalParams params;
    double u_V = 0.0;     // mu |eps|^2 + gamma_u mu / h |.|^2 on the Dirichlet part
    double u_star = 0.0;  // plus mu h |(grad e) n|^2 on the Dirichlet part
    double u_L2 = 0.0;
    double pT_L2 = 0.0;
    double pT_star = 0.0; // plus h |.|^2 on the Dirichlet part
    double pF_F = 0.0;    // K |grad|^2 + gamma_p K / h |.|^2 on the stress part + |.|^2 / lambda
    double pF_star = 0.0; // plus K h |d_n|^2 on the stress part
    double pF_L2 = 0.0;
};

/// Errors of the discrete solution `x` (global vector over d.layout()) with
/// respect to the exact fields of `mc`, by quadrature over the cut domain.
ErrorReport error_norms(const Discretization& d, const Eigen::VectorXd& x, const ManufacturedCase& mc,
                        const StabilizationParams& s);

/// Rate per refinement step from (h, E) pairs ordered coarse to fine.
/// nullopt marks a saturated step (an error is zero). Throws ConfigError for
/// fewer than two levels or non-decreasing h.
std::vector<std::optional<double>> eoc(const std::vector<std::pair<double, double>>& levels);

/// max |A x - b| / ||b||_inf (absolute if b = 0).
double galerkin_residual(const BlockSystem& system, const Eigen::VectorXd& x);

} // namespace cutbiot
