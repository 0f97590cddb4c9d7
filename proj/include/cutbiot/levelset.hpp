#pragma once

#include "cutbiot/core.hpp"

#include <functional>
#include <optional>

namespace cutbiot {

/// Signed function, negative inside, with its analytic gradient.
struct LevelSet {
    std::function<double(const Vec2&)> value;
    std::function<Vec2(const Vec2&)> gradient;

    double operator()(const Vec2& x) const { return value(x); }
};

/// Boundary part an embedded boundary point belongs to.
enum class BoundaryPart { Dirichlet, Stress };

/// Omega = {outer < 0} minus {hole < 0}. The zero set of `outer` is the
/// Dirichlet boundary, the zero set of `hole` the stress boundary.
struct LevelSetDomain {
    LevelSet outer;
    std::optional<LevelSet> hole;

    bool inside(const Vec2& x) const
    {
        return outer(x) < 0.0 && (!hole || (*hole)(x) > 0.0);
    }
};

/// Signed distance to a circle.
LevelSet circle_levelset(const Vec2& center, double radius);

/// r - r0 - r1 cos(petals * theta). Throws ConfigError unless r0 > r1 > 0.
LevelSet flower_levelset(double r0, double r1, int petals = 5);

/// x . normal - offset.
LevelSet halfplane_levelset(const Vec2& normal, double offset);

/// Constant level set (c < 0: the whole plane is inside).
LevelSet constant_levelset(double c);

struct CircleFlowerGeometry {
    double radius = 0.95;
    double r0 = 0.7;
    double r1 = 0.18;
    int petals = 5;
};

LevelSetDomain circle_minus_flower(const CircleFlowerGeometry& geo = {});

} // namespace cutbiot
