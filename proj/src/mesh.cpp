#include "cutbiot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace cutbiot {

MeshConfig translate_box(const MeshConfig& config, double delta)
{
    if (delta < 0.0) throw ConfigError("translate_box: delta must be non-negative");
    MeshConfig out = config;
    const double shift = delta * config.h();
    out.box_lo += Vec2(shift, shift);
    out.box_hi += Vec2(shift, shift);
    return out;
}

BackgroundMesh::BackgroundMesh(const Vec2& box_lo, const Vec2& box_hi, int n)
    : lo_(box_lo), hi_(box_hi), n_(n)
{
    if (n < 2) throw ConfigError("mesh: need at least 2 cells per axis");
    const Vec2 ext = hi_ - lo_;
    if (!(ext.x() > 0.0 && ext.y() > 0.0)) throw ConfigError("mesh: box_hi must exceed box_lo");
    if (std::abs(ext.x() - ext.y()) > 1e-12 * std::max(ext.x(), ext.y()))
        throw ConfigError("mesh: box must be square");
    h_ = ext.x() / n;

    // vertical facets x = lo + i h
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) {
            Facet f;
            const int left = i > 0 ? cell_index(i - 1, j) : -1;
            const int right = i < n ? cell_index(i, j) : -1;
            f.cells = left >= 0 ? std::array<int, 2>{left, right} : std::array<int, 2>{right, -1};
            f.normal = Vec2(left >= 0 ? 1.0 : -1.0, 0.0);
            f.a = lo_ + Vec2(i * h_, j * h_);
            f.b = lo_ + Vec2(i * h_, (j + 1) * h_);
            if (f.interior()) interior_facets_.push_back(static_cast<int>(facets_.size()));
            facets_.push_back(f);
        }
    // horizontal facets y = lo + j h
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i) {
            Facet f;
            const int below = j > 0 ? cell_index(i, j - 1) : -1;
            const int above = j < n ? cell_index(i, j) : -1;
            f.cells = below >= 0 ? std::array<int, 2>{below, above} : std::array<int, 2>{above, -1};
            f.normal = Vec2(0.0, below >= 0 ? 1.0 : -1.0);
            f.a = lo_ + Vec2(i * h_, j * h_);
            f.b = lo_ + Vec2((i + 1) * h_, j * h_);
            if (f.interior()) interior_facets_.push_back(static_cast<int>(facets_.size()));
            facets_.push_back(f);
        }
}

Vec2 BackgroundMesh::cell_origin(int c) const
{
    const auto [i, j] = cell_ij(c);
    return lo_ + Vec2(i * h_, j * h_);
}

BackgroundMesh build_mesh(const Vec2& box_lo, const Vec2& box_hi, int n)
{
    return BackgroundMesh(box_lo, box_hi, n);
}

const char* to_string(CellTag t)
{
    switch (t) {
    case CellTag::Outside: return "outside";
    case CellTag::Interior: return "interior";
    case CellTag::Cut: return "cut";
    }
    return "?";
}

void ActiveMesh::write_classification(std::ostream& os) const
{
    os << "cell_index,tag\n";
    for (std::size_t c = 0; c < tags_.size(); ++c) os << c << ',' << to_string(tags_[c]) << '\n';
}

namespace {

CellTag probe_cell(const BackgroundMesh& mesh, int c, const LevelSetDomain& dom, int n_probe)
{
    const Vec2 o = mesh.cell_origin(c);
    const double h = mesh.h();
    bool any_in = false, any_out = false;
    for (int b = 0; b < n_probe; ++b)
        for (int a = 0; a < n_probe; ++a) {
            const Vec2 x = o + h * Vec2(double(a) / (n_probe - 1), double(b) / (n_probe - 1));
            (dom.inside(x) ? any_in : any_out) = true;
            if (any_in && any_out) return CellTag::Cut;
        }
    return any_in ? CellTag::Interior : CellTag::Outside;
}

} // namespace

ActiveMesh classify(const BackgroundMesh& mesh, const LevelSetDomain& dom, const CutOptions& opts)
{
    if (opts.n_probe < 2) throw ConfigError("classify: n_probe must be at least 2");
    ActiveMesh am;
    am.mesh_ = &mesh;
    am.tags_.resize(mesh.num_cells());
    const double cell_area = mesh.h() * mesh.h();
    for (int c = 0; c < mesh.num_cells(); ++c) {
        CellTag tag = probe_cell(mesh, c, dom, opts.n_probe);
        bool stress = false;
        if (tag == CellTag::Cut) {
            const CellCut cut = cut_cell(mesh.cell_origin(c), mesh.h(), dom, opts, c);
            const double area = cut.volume.measure();
            if (area < opts.sliver_tol * cell_area) {
                char frac[32];
                std::snprintf(frac, sizeof frac, "%.3e", area / cell_area);
                log_warning("cell " + std::to_string(c) + " has a sliver cut (area fraction " + frac +
                            "), tagged outside");
                tag = CellTag::Outside;
            } else if (cut.boundary.size() == 0 && area > (1.0 - opts.sliver_tol) * cell_area) {
                tag = CellTag::Interior;
            } else {
                stress = std::find(cut.boundary.part.begin(), cut.boundary.part.end(),
                                   BoundaryPart::Stress) != cut.boundary.part.end();
            }
        }
        am.tags_[c] = tag;
        if (tag != CellTag::Outside) am.active_.push_back(c);
        if (tag == CellTag::Interior) am.interior_.push_back(c);
        if (tag == CellTag::Cut) am.cut_.push_back(c);
        if (stress) am.stress_cut_.push_back(c);
    }
    for (int fi : mesh.interior_facets()) {
        const Facet& f = mesh.facets()[fi];
        const CellTag t0 = am.tags_[f.cells[0]], t1 = am.tags_[f.cells[1]];
        if (t0 == CellTag::Outside || t1 == CellTag::Outside) continue;
        if (t0 == CellTag::Cut || t1 == CellTag::Cut) am.ghost_facets_.push_back(fi);
    }
    return am;
}

CutQuadrature::CutQuadrature(const ActiveMesh& active, const LevelSetDomain& dom,
                             const CutOptions& opts)
    : active_(&active), order_(opts.order),
      interior_rule_(full_cell_rule(active.background().h(), opts.order))
{
    const BackgroundMesh& mesh = active.background();
    slot_.assign(mesh.num_cells(), -1);
    cut_rules_.reserve(active.cut_cells().size());
    for (int c : active.cut_cells()) {
        slot_[c] = static_cast<int>(cut_rules_.size());
        cut_rules_.push_back(cut_cell(mesh.cell_origin(c), mesh.h(), dom, opts, c));
    }
}

const CellRule& CutQuadrature::volume(int cell) const
{
    if (!active_->is_active(cell))
        throw AssemblyError("no volume rule for inactive cell " + std::to_string(cell));
    const int s = slot_[cell];
    return s < 0 ? interior_rule_ : cut_rules_[s].volume;
}

const BoundaryRule& CutQuadrature::boundary(int cell) const
{
    const int s = slot_[cell];
    return s < 0 ? empty_boundary_ : cut_rules_[s].boundary;
}

double CutQuadrature::volume_measure() const
{
    double s = 0.0;
    for (int c : active_->active_cells()) s += volume(c).measure();
    return s;
}

double CutQuadrature::boundary_length(BoundaryPart part) const
{
    double s = 0.0;
    for (const CellCut& cc : cut_rules_) s += cc.boundary.length(part);
    return s;
}

void CutQuadrature::write_boundary_points(std::ostream& os) const
{
    const BackgroundMesh& mesh = active_->background();
    os << "x,y,nx,ny,w,tag\n";
    char buf[160];
    for (int c : active_->cut_cells()) {
        const BoundaryRule& br = boundary(c);
        for (std::size_t q = 0; q < br.size(); ++q) {
            const Vec2 x = mesh.cell_origin(c) + mesh.h() * br.xi[q];
            std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e,%.12e,%.12e,%s\n", x.x(), x.y(),
                          br.normal[q].x(), br.normal[q].y(), br.w[q],
                          br.part[q] == BoundaryPart::Dirichlet ? "dirichlet" : "stress");
            os << buf;
        }
    }
}

} // namespace cutbiot
