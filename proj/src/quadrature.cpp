#include "cutbiot/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace cutbiot {

Rule1D gauss_legendre(int n)
{
    if (n < 1) throw ConfigError("gauss_legendre: need at least one point");
    Rule1D rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n starting from the Chebyshev-like guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.points[i] = 0.5 * (1.0 - z);
        rule.points[n - 1 - i] = 0.5 * (1.0 + z);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

Rule1D gauss_for_order(int order)
{
    return gauss_legendre(std::max(1, (order + 2) / 2));
}

Rule2D tensor_gauss(int order)
{
    const Rule1D g = gauss_for_order(order);
    Rule2D rule;
    for (std::size_t j = 0; j < g.points.size(); ++j)
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            rule.points.emplace_back(g.points[i], g.points[j]);
            rule.weights.push_back(g.weights[i] * g.weights[j]);
        }
    return rule;
}

namespace {

Rule2D collapsed_gauss(int order)
{
    // Duffy map (u,v) -> (u, v(1-u)), Jacobian (1-u).
    const Rule1D gu = gauss_for_order(order + 1);
    const Rule1D gv = gauss_for_order(order);
    Rule2D rule;
    for (std::size_t i = 0; i < gu.points.size(); ++i)
        for (std::size_t j = 0; j < gv.points.size(); ++j) {
            const double u = gu.points[i];
            rule.points.emplace_back(u, gv.points[j] * (1.0 - u));
            rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
        }
    return rule;
}

} // namespace

Rule2D triangle_rule(int order)
{
    Rule2D rule;
    if (order <= 1) {
        rule.points = {Vec2(1.0 / 3.0, 1.0 / 3.0)};
        rule.weights = {0.5};
    } else if (order == 2) {
        rule.points = {Vec2(1.0 / 6.0, 1.0 / 6.0), Vec2(2.0 / 3.0, 1.0 / 6.0),
                       Vec2(1.0 / 6.0, 2.0 / 3.0)};
        rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    } else if (order <= 5) {
        // Radon's 7-point rule.
        const double s = std::sqrt(15.0);
        const double a = (6.0 - s) / 21.0, b = (6.0 + s) / 21.0;
        const double wa = (155.0 - s) / 2400.0, wb = (155.0 + s) / 2400.0;
        rule.points = {Vec2(1.0 / 3.0, 1.0 / 3.0),
                       Vec2(a, a), Vec2(1.0 - 2.0 * a, a), Vec2(a, 1.0 - 2.0 * a),
                       Vec2(b, b), Vec2(1.0 - 2.0 * b, b), Vec2(b, 1.0 - 2.0 * b)};
        rule.weights = {9.0 / 80.0, wa, wa, wa, wb, wb, wb};
    } else {
        rule = collapsed_gauss(order);
    }
    return rule;
}

} // namespace cutbiot
