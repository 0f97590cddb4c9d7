#include "cutbiot/levelset.hpp"

#include <cmath>
#include <iostream>
#include <atomic>

namespace cutbiot {

namespace {
std::atomic<bool> g_warnings{true};
}

void set_warnings_enabled(bool on) { g_warnings = on; }

void log_warning(const std::string& msg)
{
    if (g_warnings) std::clog << "warning: " << msg << '\n';
}

LevelSet circle_levelset(const Vec2& center, double radius)
{
    if (!(radius > 0.0)) throw ConfigError("circle radius must be positive");
    LevelSet ls;
    ls.value = [=](const Vec2& x) { return (x - center).norm() - radius; };
    ls.gradient = [=](const Vec2& x) -> Vec2 {
        const Vec2 d = x - center;
        const double r = d.norm();
        return r > 0.0 ? Vec2(d / r) : Vec2(1.0, 0.0);
    };
    return ls;
}

LevelSet flower_levelset(double r0, double r1, int petals)
{
    if (!(r1 > 0.0) || !(r0 > r1))
        throw ConfigError("invalid flower: need r0 > r1 > 0");
    if (petals < 1) throw ConfigError("invalid flower: petals must be positive");
    const double m = petals;
    LevelSet ls;
    ls.value = [=](const Vec2& x) {
        const double r = x.norm();
        const double theta = std::atan2(x.y(), x.x());
        return r - r0 - r1 * std::cos(m * theta);
    };
    ls.gradient = [=](const Vec2& x) -> Vec2 {
        const double r2 = x.squaredNorm();
        if (r2 == 0.0) return Vec2(1.0, 0.0);
        const double r = std::sqrt(r2);
        const double theta = std::atan2(x.y(), x.x());
        // grad r = x/r, grad theta = (-y, x)/r^2
        const double s = m * r1 * std::sin(m * theta) / r2;
        return Vec2(x.x() / r - s * x.y(), x.y() / r + s * x.x());
    };
    return ls;
}

LevelSet halfplane_levelset(const Vec2& normal, double offset)
{
    const Vec2 n = normal.normalized();
    LevelSet ls;
    ls.value = [=](const Vec2& x) { return n.dot(x) - offset; };
    ls.gradient = [=](const Vec2&) -> Vec2 { return n; };
    return ls;
}

LevelSet constant_levelset(double c)
{
    LevelSet ls;
    ls.value = [=](const Vec2&) { return c; };
    ls.gradient = [](const Vec2&) -> Vec2 { return Vec2::Zero(); };
    return ls;
}

LevelSetDomain circle_minus_flower(const CircleFlowerGeometry& geo)
{
    LevelSet hole = flower_levelset(geo.r0, geo.r1, geo.petals);
    if (geo.r0 + geo.r1 >= geo.radius)
        throw ConfigError("invalid geometry: flower must lie inside the circle");
    return LevelSetDomain{circle_levelset(Vec2::Zero(), geo.radius), std::move(hole)};
}

} // namespace cutbiot
