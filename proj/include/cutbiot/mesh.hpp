#pragma once

#include "cutbiot/cut_cell.hpp"
#include "cutbiot/levelset.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace cutbiot {

struct MeshConfig {
    Vec2 box_lo{-1.0, -1.0};
    Vec2 box_hi{1.0, 1.0};
    int n = 16;

    double h() const { return (box_hi.x() - box_lo.x()) / n; }
};

/// Shift the box by delta * h in both directions, h taken from `config`.
MeshConfig translate_box(const MeshConfig& config, double delta);

/// Edge of the background grid. For interior facets cells[0] is the
/// left/bottom neighbor and `normal` points from cells[0] into cells[1];
/// boundary facets have cells[1] == -1.
struct Facet {
    std::array<int, 2> cells;
    Vec2 normal;
    Vec2 a, b;

    bool interior() const { return cells[1] >= 0; }
};

/// Uniform N x N grid of congruent squares. Cell (i, j) has index j * N + i.
class BackgroundMesh {
public:
    BackgroundMesh(const Vec2& box_lo, const Vec2& box_hi, int n);
    explicit BackgroundMesh(const MeshConfig& c) : BackgroundMesh(c.box_lo, c.box_hi, c.n) {}

    int n() const { return n_; }
    double h() const { return h_; }
    const Vec2& box_lo() const { return lo_; }
    const Vec2& box_hi() const { return hi_; }

    int num_cells() const { return n_ * n_; }
    int cell_index(int i, int j) const { return j * n_ + i; }
    std::array<int, 2> cell_ij(int c) const { return {c % n_, c / n_}; }
    Vec2 cell_origin(int c) const;
    Vec2 cell_center(int c) const { return cell_origin(c) + Vec2(0.5 * h_, 0.5 * h_); }

    const std::vector<Facet>& facets() const { return facets_; }
    const std::vector<int>& interior_facets() const { return interior_facets_; }

private:
    Vec2 lo_, hi_;
    int n_;
    double h_;
    std::vector<Facet> facets_;
    std::vector<int> interior_facets_;
};

BackgroundMesh build_mesh(const Vec2& box_lo, const Vec2& box_hi, int n);

enum class CellTag { Outside, Interior, Cut };

const char* to_string(CellTag t);

/// Background cells classified against a level-set domain.
class ActiveMesh {
public:
    const BackgroundMesh& background() const { return *mesh_; }
    CellTag tag(int c) const { return tags_[c]; }
    bool is_active(int c) const { return tags_[c] != CellTag::Outside; }

    const std::vector<int>& active_cells() const { return active_; }
    const std::vector<int>& cut_cells() const { return cut_; }
    const std::vector<int>& interior_cells() const { return interior_; }
    const std::vector<int>& stress_cut_cells() const { return stress_cut_; }
    const std::vector<int>& ghost_facets() const { return ghost_facets_; }

    /// Plain-text table "cell_index,tag" over all background cells.
    void write_classification(std::ostream& os) const;

private:
    friend ActiveMesh classify(const BackgroundMesh&, const LevelSetDomain&, const CutOptions&);

    const BackgroundMesh* mesh_ = nullptr;
    std::vector<CellTag> tags_;
    std::vector<int> active_, cut_, interior_, stress_cut_, ghost_facets_;
};

/// Probe every cell on an n_probe x n_probe grid (corners included): all
/// probes inside -> Interior, all outside -> Outside, else Cut. Cut cells
/// whose reconstructed inside area is below the sliver tolerance become
/// Outside (with a warning); cut cells without any boundary piece and a full
/// inside area become Interior. The mesh must outlive the result.
ActiveMesh classify(const BackgroundMesh& mesh, const LevelSetDomain& dom,
                    const CutOptions& opts = {});

/// Quadrature over the active mesh: every active cell gets a volume rule,
/// every cut cell an embedded-boundary rule.
class CutQuadrature {
public:
    CutQuadrature(const ActiveMesh& active, const LevelSetDomain& dom, const CutOptions& opts = {});

    const CellRule& volume(int cell) const;
    const BoundaryRule& boundary(int cell) const; // empty for interior cells
    int order() const { return order_; }

    double volume_measure() const;
    double boundary_length(BoundaryPart part) const;

    /// CSV "x,y,nx,ny,w,tag" of all boundary quadrature points.
    void write_boundary_points(std::ostream& os) const;

private:
    const ActiveMesh* active_;
    int order_;
    CellRule interior_rule_;
    BoundaryRule empty_boundary_;
    std::vector<int> slot_; // background cell -> index into cut_rules_, -1 if none
    std::vector<CellCut> cut_rules_;
};

} // namespace cutbiot
