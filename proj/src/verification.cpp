#include "cutbiot/verification.hpp"

#include <cmath>
#include <numbers>

namespace cutbiot {

namespace {

constexpr double pi = std::numbers::pi;

} // namespace

BoundaryData ManufacturedCase::data() const
{
    // The callbacks copy the case so that they outlive it.
    const ManufacturedCase c = *this;
    BoundaryData d;
    d.u_D = c.u;
    d.p_FD = c.p_F;
    d.f = [c](const Vec2& x) { return c.f(x); };
    d.g = [c](const Vec2& x) { return c.g(x); };
    d.g_N = [c](const Vec2& x, const Vec2& n) { return c.params.K * c.grad_p_F(x).dot(n); };
    d.sigma_N = [c](const Vec2& x, const Vec2& n) -> Vec2 {
        return c.params.mu * (c.eps_u(x) * n) - c.p_T(x) * n;
    };
    return d;
}

ManufacturedCase make_case(const std::string& id, const PhysicalParams& params)
{
    params.validate();
    ManufacturedCase c;
    c.id = id;
    c.params = params;
    c.p_F = [](const Vec2& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
    c.grad_p_F = [](const Vec2& x) -> Vec2 {
        return pi * Vec2(std::cos(pi * x.x()) * std::sin(pi * x.y()),
                         std::sin(pi * x.x()) * std::cos(pi * x.y()));
    };
    c.lap_p_F = [](const Vec2& x) { return -2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()); };

    if (id == "divfree") {
        c.u = [](const Vec2& x) -> Vec2 { return {std::cos(pi * x.y()), std::sin(pi * x.x())}; };
        c.grad_u = [](const Vec2& x) {
            Mat2 g;
            g << 0.0, -pi * std::sin(pi * x.y()), pi * std::cos(pi * x.x()), 0.0;
            return g;
        };
        c.div_eps_u = [](const Vec2& x) -> Vec2 {
            return -0.5 * pi * pi * Vec2(std::cos(pi * x.y()), std::sin(pi * x.x()));
        };
        c.div_u = [](const Vec2&) { return 0.0; };
        c.grad_div_u = [](const Vec2&) -> Vec2 { return Vec2::Zero(); };
    } else if (id == "variant") {
        c.u = [](const Vec2& x) -> Vec2 {
            return {std::cos(pi * x.y()) + x.x() * x.x(), std::sin(pi * x.x())};
        };
        c.grad_u = [](const Vec2& x) {
            Mat2 g;
            g << 2.0 * x.x(), -pi * std::sin(pi * x.y()), pi * std::cos(pi * x.x()), 0.0;
            return g;
        };
        c.div_eps_u = [](const Vec2& x) -> Vec2 {
            return Vec2(2.0 - 0.5 * pi * pi * std::cos(pi * x.y()), -0.5 * pi * pi * std::sin(pi * x.x()));
        };
        c.div_u = [](const Vec2& x) { return 2.0 * x.x(); };
        c.grad_div_u = [](const Vec2&) -> Vec2 { return Vec2(2.0, 0.0); };
    } else {
        throw ConfigError("unknown manufactured case '" + id + "'");
    }
    return c;
}

namespace {

struct LocalFields {
    Vec2 u;
    Mat2 grad_u;
    double pT;
    double pF;
    Vec2 grad_pF;
};

class FieldEvaluator {
public:
    FieldEvaluator(const Discretization& d, const Eigen::VectorXd& x) : d_(d), x_(x)
    {
        const FieldLayout& L = d.layout();
        if (x.size() != L.total()) throw AssemblyError("error_norms: solution size does not match layout");
    }

    LocalFields at(int cell, const Vec2& xi) const
    {
        const FieldLayout& L = d_.layout();
        const auto xu = x_.segment(L.offset_u(), L.n_u);
        const auto xT = x_.segment(L.offset_T(), L.n_T);
        const auto xF = x_.segment(L.offset_F(), L.n_F);
        LocalFields f;
        const ShapeValues su = d_.u().eval(xi);
        const auto nu = d_.u().cell_nodes(cell);
        f.u.setZero();
        f.grad_u.setZero();
        for (std::size_t a = 0; a < nu.size(); ++a)
            for (int c = 0; c < 2; ++c) {
                const double v = xu[d_.u().dof(nu[a], c)];
                f.u[c] += su.values[a] * v;
                f.grad_u.row(c) += su.grads.row(a) * v;
            }
        const ShapeValues sT = d_.pT().eval(xi);
        const auto nT = d_.pT().cell_nodes(cell);
        f.pT = 0.0;
        for (std::size_t a = 0; a < nT.size(); ++a) f.pT += sT.values[a] * xT[nT[a]];
        const ShapeValues sF = d_.pF().eval(xi);
        const auto nF = d_.pF().cell_nodes(cell);
        f.pF = 0.0;
        f.grad_pF.setZero();
        for (std::size_t a = 0; a < nF.size(); ++a) {
            f.pF += sF.values[a] * xF[nF[a]];
            f.grad_pF += sF.grads.row(a).transpose() * xF[nF[a]];
        }
        return f;
    }

private:
    const Discretization& d_;
    const Eigen::VectorXd& x_;
};

} // namespace

ErrorReport error_norms(const Discretization& d, const Eigen::VectorXd& x, const ManufacturedCase& mc,
                        const StabilizationParams& s)
{
    const PhysicalParams& p = mc.params;
    const double h = d.h();
    const FieldEvaluator eval(d, x);

    double eps2 = 0, u2 = 0, pT2 = 0, gradF2 = 0, pF2 = 0;
    double u_gd = 0, flux_u_gd = 0, pT_gd = 0, pF_gs = 0, flux_F_gs = 0;
    for (int c : d.active().active_cells()) {
        const Vec2 o = d.mesh().cell_origin(c);
        const CellRule& rule = d.quadrature().volume(c);
        for (std::size_t q = 0; q < rule.w.size(); ++q) {
            const Vec2 X = o + h * rule.xi[q];
            const LocalFields f = eval.at(c, rule.xi[q]);
            const double w = rule.w[q];
            const Vec2 eu = mc.u(X) - f.u;
            const Mat2 ge = mc.grad_u(X) - f.grad_u;
            const Mat2 ee = 0.5 * (ge + ge.transpose());
            eps2 += w * ee.squaredNorm();
            u2 += w * eu.squaredNorm();
            pT2 += w * std::pow(mc.p_T(X) - f.pT, 2);
            pF2 += w * std::pow(mc.p_F(X) - f.pF, 2);
            gradF2 += w * (mc.grad_p_F(X) - f.grad_pF).squaredNorm();
        }
        const BoundaryRule& br = d.quadrature().boundary(c);
        for (std::size_t q = 0; q < br.size(); ++q) {
            const Vec2 X = o + h * br.xi[q];
            const Vec2& n = br.normal[q];
            const LocalFields f = eval.at(c, br.xi[q]);
            const double w = br.w[q];
            if (br.part[q] == BoundaryPart::Dirichlet) {
                u_gd += w * (mc.u(X) - f.u).squaredNorm();
                flux_u_gd += w * ((mc.grad_u(X) - f.grad_u) * n).squaredNorm();
                pT_gd += w * std::pow(mc.p_T(X) - f.pT, 2);
            } else {
                pF_gs += w * std::pow(mc.p_F(X) - f.pF, 2);
                flux_F_gs += w * std::pow((mc.grad_p_F(X) - f.grad_pF).dot(n), 2);
            }
        }
    }

    ErrorReport r;
    r.h = h;
    r.params = p;
    const double v2 = p.mu * eps2 + s.gamma_u * p.mu / h * u_gd;
    r.u_V = std::sqrt(v2);
    r.u_star = std::sqrt(v2 + p.mu * h * flux_u_gd);
    r.u_L2 = std::sqrt(u2);
    r.pT_L2 = std::sqrt(pT2);
    r.pT_star = std::sqrt(pT2 + h * pT_gd);
    const double f2 = p.K * gradF2 + s.gamma_p * p.K / h * pF_gs + pF2 / p.lambda;
    r.pF_F = std::sqrt(f2);
    r.pF_star = std::sqrt(f2 + p.K * h * flux_F_gs);
    r.pF_L2 = std::sqrt(pF2);
    return r;
}

std::vector<std::optional<double>> eoc(const std::vector<std::pair<double, double>>& levels)
{
    if (levels.size() < 2) throw ConfigError("eoc: need at least two levels");
    std::vector<std::optional<double>> out;
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const auto [h0, e0] = levels[i - 1];
        const auto [h1, e1] = levels[i];
        if (!(h1 < h0) || !(h1 > 0.0)) throw ConfigError("eoc: h must decrease strictly");
        if (e0 <= 0.0 || e1 <= 0.0) {
            out.push_back(std::nullopt);
            continue;
        }
        out.push_back(std::log(e0 / e1) / std::log(h0 / h1));
    }
    return out;
}

double galerkin_residual(const BlockSystem& system, const Eigen::VectorXd& x)
{
    const Eigen::VectorXd r = system.matrix * x - system.rhs;
    const double bn = system.rhs.lpNorm<Eigen::Infinity>();
    return r.lpNorm<Eigen::Infinity>() / (bn > 0.0 ? bn : 1.0);
}

} // namespace cutbiot
