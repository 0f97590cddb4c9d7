#include "cutbiot/cut_cell.hpp"

#include "cutbiot/quadrature.hpp"

#include <Eigen/LU>

#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace cutbiot {

double CellRule::measure() const
{
    double s = 0.0;
    for (double wi : w) s += wi;
    return s;
}

double BoundaryRule::length(BoundaryPart p) const
{
    double s = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q)
        if (part[q] == p) s += w[q];
    return s;
}

namespace {

// Both level sets in "keep <= 0" form: psi[0] = outer, psi[1] = -hole.
struct PVert {
    Vec2 xi;
    std::array<double, 2> psi;
};

PVert lerp(const PVert& a, const PVert& b, double t)
{
    return {a.xi + t * (b.xi - a.xi),
            {a.psi[0] + t * (b.psi[0] - a.psi[0]), a.psi[1] + t * (b.psi[1] - a.psi[1])}};
}

using Segment = std::pair<PVert, PVert>;

// Sutherland-Hodgman against psi[k] <= 0. On a convex polygon with linear
// psi at most one new edge appears; it is returned in `cut`.
std::vector<PVert> clip(const std::vector<PVert>& in, int k, std::optional<Segment>& cut)
{
    std::vector<PVert> out;
    std::optional<PVert> exit_pt, entry_pt;
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        const PVert& a = in[i];
        const PVert& b = in[(i + 1) % n];
        const bool a_in = a.psi[k] <= 0.0;
        const bool b_in = b.psi[k] <= 0.0;
        if (a_in) out.push_back(a);
        if (a_in != b_in) {
            const double t = a.psi[k] / (a.psi[k] - b.psi[k]);
            PVert p = lerp(a, b, t);
            p.psi[k] = 0.0;
            out.push_back(p);
            if (a_in)
                exit_pt = p;
            else
                entry_pt = p;
        }
    }
    cut.reset();
    if (exit_pt && entry_pt) cut = Segment{*exit_pt, *entry_pt};
    return out;
}

std::optional<Segment> clip_segment(const Segment& s, int k)
{
    const bool a_in = s.first.psi[k] <= 0.0;
    const bool b_in = s.second.psi[k] <= 0.0;
    if (a_in && b_in) return s;
    if (!a_in && !b_in) return std::nullopt;
    const double t = s.first.psi[k] / (s.first.psi[k] - s.second.psi[k]);
    const PVert p = lerp(s.first, s.second, t);
    return a_in ? Segment{s.first, p} : Segment{p, s.second};
}

// Gradient (reference coordinates) of the linear interpolant of psi[k].
Vec2 linear_gradient(const std::array<PVert, 3>& tri, int k)
{
    Mat2 m;
    m.row(0) = (tri[1].xi - tri[0].xi).transpose();
    m.row(1) = (tri[2].xi - tri[0].xi).transpose();
    const Vec2 rhs(tri[1].psi[k] - tri[0].psi[k], tri[2].psi[k] - tri[0].psi[k]);
    return m.inverse() * rhs;
}

bool sign_mismatch(double a, double b, double mid)
{
    constexpr double tiny = 1e-14;
    if (a > 0.0 && b > 0.0) return mid < -tiny;
    if (a < 0.0 && b < 0.0) return mid > tiny;
    return false;
}

class CellClipper {
public:
    CellClipper(const Vec2& origin, double h, const LevelSetDomain& dom,
                const CutOptions& opts, int cell_id)
        : origin_(origin), h_(h), dom_(dom), opts_(opts), cell_id_(cell_id),
          tri_rule_(triangle_rule(opts.order)), sq_rule_(tensor_gauss(opts.order)),
          line_rule_(gauss_for_order(opts.order))
    {
    }

    CellCut run()
    {
        for (int depth = opts_.depth;; ++depth) {
            sample(depth);
            if (!consistent()) {
                if (depth >= opts_.max_depth)
                    throw GeometryResolutionError(
                        "geometry-resolution failure in cell " + std::to_string(cell_id_) +
                            ": level set not linearly resolvable at depth " +
                            std::to_string(depth),
                        cell_id_);
                continue;
            }
            CellCut result;
            result.depth = depth;
            if (fully_inside()) {
                result.volume = full_cell_rule(h_, opts_.order);
                return result;
            }
            build(result);
            return result;
        }
    }

private:
    Vec2 physical(const Vec2& xi) const { return origin_ + h_ * xi; }

    void sample(int depth)
    {
        m_ = 1 << depth;
        stride_ = 2 * m_ + 1;
        grid_.assign(static_cast<std::size_t>(stride_) * stride_, {});
        for (int b = 0; b < stride_; ++b)
            for (int a = 0; a < stride_; ++a) {
                const Vec2 xi(double(a) / (2 * m_), double(b) / (2 * m_));
                const Vec2 x = physical(xi);
                auto& v = grid_[idx(a, b)];
                v.xi = xi;
                v.psi[0] = dom_.outer(x);
                v.psi[1] = dom_.hole ? -(*dom_.hole)(x) : -1.0;
            }
    }

    bool fully_inside() const
    {
        for (const auto& v : grid_)
            if (!(v.psi[0] < 0.0 && v.psi[1] < 0.0)) return false;
        return true;
    }

    std::size_t idx(int a, int b) const { return static_cast<std::size_t>(b) * stride_ + a; }

    bool consistent() const
    {
        for (int j = 0; j < m_; ++j)
            for (int i = 0; i < m_; ++i) {
                const int a = 2 * i, b = 2 * j;
                // four edges and the splitting diagonal
                const std::array<std::array<std::size_t, 3>, 5> checks{{
                    {idx(a, b), idx(a + 2, b), idx(a + 1, b)},
                    {idx(a, b), idx(a, b + 2), idx(a, b + 1)},
                    {idx(a, b), idx(a + 2, b + 2), idx(a + 1, b + 1)},
                    {idx(a, b + 2), idx(a + 2, b + 2), idx(a + 1, b + 2)},
                    {idx(a + 2, b), idx(a + 2, b + 2), idx(a + 2, b + 1)},
                }};
                for (const auto& c : checks)
                    for (int k = 0; k < 2; ++k)
                        if (sign_mismatch(grid_[c[0]].psi[k], grid_[c[1]].psi[k],
                                          grid_[c[2]].psi[k]))
                            return false;
            }
        return true;
    }

    void build(CellCut& out) const
    {
        const double sub = 1.0 / m_;
        for (int j = 0; j < m_; ++j)
            for (int i = 0; i < m_; ++i) {
                const PVert& c00 = grid_[idx(2 * i, 2 * j)];
                const PVert& c10 = grid_[idx(2 * i + 2, 2 * j)];
                const PVert& c11 = grid_[idx(2 * i + 2, 2 * j + 2)];
                const PVert& c01 = grid_[idx(2 * i, 2 * j + 2)];
                const std::array<const PVert*, 4> corners{&c00, &c10, &c11, &c01};

                bool outside = false, inside = true;
                for (int k = 0; k < 2; ++k) {
                    bool all_pos = true;
                    for (const PVert* c : corners) {
                        all_pos = all_pos && c->psi[k] > 0.0;
                        inside = inside && c->psi[k] < 0.0;
                    }
                    outside = outside || all_pos;
                }
                if (outside) continue;
                if (inside) {
                    for (std::size_t q = 0; q < sq_rule_.points.size(); ++q) {
                        out.volume.xi.push_back(c00.xi + sub * sq_rule_.points[q]);
                        out.volume.w.push_back(sq_rule_.weights[q] * sub * sub * h_ * h_);
                    }
                    continue;
                }
                clip_triangle({c00, c10, c11}, out);
                clip_triangle({c00, c11, c01}, out);
            }
    }

    void clip_triangle(const std::array<PVert, 3>& tri, CellCut& out) const
    {
        std::vector<PVert> poly(tri.begin(), tri.end());
        std::optional<Segment> dirichlet, stress;
        poly = clip(poly, 0, dirichlet);
        if (poly.size() < 3) return;
        poly = clip(poly, 1, stress);
        if (dirichlet) dirichlet = clip_segment(*dirichlet, 1);

        for (std::size_t v = 1; v + 1 < poly.size(); ++v) {
            const Vec2 e1 = poly[v].xi - poly[0].xi;
            const Vec2 e2 = poly[v + 1].xi - poly[0].xi;
            const double area = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
            if (!(area > 0.0)) continue;
            for (std::size_t q = 0; q < tri_rule_.points.size(); ++q) {
                const Vec2& p = tri_rule_.points[q];
                out.volume.xi.push_back(poly[0].xi + p.x() * e1 + p.y() * e2);
                out.volume.w.push_back(tri_rule_.weights[q] * 2.0 * area * h_ * h_);
            }
        }
        if (dirichlet) add_segment(*dirichlet, linear_gradient(tri, 0), BoundaryPart::Dirichlet, out);
        if (stress) add_segment(*stress, linear_gradient(tri, 1), BoundaryPart::Stress, out);
    }

    void add_segment(const Segment& s, const Vec2& grad, BoundaryPart part, CellCut& out) const
    {
        const Vec2 d = s.second.xi - s.first.xi;
        const double len = d.norm();
        if (!(len > 1e-14)) return;
        const double gn = grad.norm();
        if (!(gn > 0.0)) return;
        const Vec2 n = grad / gn;
        const LevelSet* other = nullptr;
        if (dom_.hole && part == BoundaryPart::Dirichlet) other = &*dom_.hole;
        if (part == BoundaryPart::Stress) other = &dom_.outer;
        for (std::size_t q = 0; q < line_rule_.points.size(); ++q) {
            const Vec2 xi = s.first.xi + line_rule_.points[q] * d;
            if (other && std::abs((*other)(physical(xi))) < 1e-8)
                throw GeometryConflictError("both boundary parts meet in cell " +
                                                std::to_string(cell_id_),
                                            cell_id_);
            out.boundary.xi.push_back(xi);
            out.boundary.w.push_back(line_rule_.weights[q] * len * h_);
            out.boundary.normal.push_back(n);
            out.boundary.part.push_back(part);
        }
    }

    Vec2 origin_;
    double h_;
    const LevelSetDomain& dom_;
    const CutOptions& opts_;
    int cell_id_;
    Rule2D tri_rule_, sq_rule_;
    Rule1D line_rule_;
    int m_ = 0, stride_ = 0;
    std::vector<PVert> grid_;
};

} // namespace

CellCut cut_cell(const Vec2& origin, double h, const LevelSetDomain& dom,
                 const CutOptions& opts, int cell_id)
{
    if (opts.depth < 0 || opts.max_depth < opts.depth)
        throw ConfigError("cut_cell: invalid subdivision depth range");
    return CellClipper(origin, h, dom, opts, cell_id).run();
}

CellRule full_cell_rule(double h, int order)
{
    const Rule2D g = tensor_gauss(order);
    CellRule rule;
    rule.xi = g.points;
    rule.w.reserve(g.weights.size());
    for (double w : g.weights) rule.w.push_back(w * h * h);
    return rule;
}

CellRule cut_volume_rule(const Vec2& origin, double h, const LevelSetDomain& dom,
                         const CutOptions& opts)
{
    return cut_cell(origin, h, dom, opts).volume;
}

BoundaryRule cut_surface_rule(const Vec2& origin, double h, const LevelSetDomain& dom,
                              const CutOptions& opts)
{
    return cut_cell(origin, h, dom, opts).boundary;
}

} // namespace cutbiot
