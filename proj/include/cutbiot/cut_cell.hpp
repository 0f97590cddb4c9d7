#pragma once

#include "cutbiot/levelset.hpp"

#include <vector>

namespace cutbiot {

/// Cut-cell reconstruction settings.
struct CutOptions {
    int n_probe = 8;          // classification probes per axis per cell
    int depth = 3;            // initial sub-grid depth m (2^m x 2^m sub-squares)
    int max_depth = 6;        // depth at which an unresolved cell is an error
    int order = 5;            // polynomial exactness of volume and surface rules
    double sliver_tol = 1e-12; // cells with |T cap Omega| < tol |T| are dropped
};

/// Volume rule of one cell. Points in reference coordinates of the cell
/// ([0,1]^2, x = origin + h * xi), weights in physical area.
struct CellRule {
    std::vector<Vec2> xi;
    std::vector<double> w;

    double measure() const;
};

/// Embedded-boundary rule of one cell. Weights are physical arc length,
/// normals point out of Omega.
struct BoundaryRule {
    std::vector<Vec2> xi;
    std::vector<double> w;
    std::vector<Vec2> normal;
    std::vector<BoundaryPart> part;

    std::size_t size() const { return xi.size(); }
    double length(BoundaryPart p) const;
};

struct CellCut {
    CellRule volume;
    BoundaryRule boundary;
    int depth = 0; // sub-grid depth actually used
};

/// Reconstruct T cap Omega for the square cell [origin, origin + h]^2.
///
/// The cell is split into 2^m x 2^m sub-squares, each into two triangles;
/// both level sets are interpolated linearly on every triangle and the
/// triangle is clipped against them. Sub-squares entirely inside use a tensor
/// Gauss rule. If the sign of a level set at an edge midpoint disagrees with
/// its linear interpolant (a crossing pair missed by the sub-grid), m is
/// increased; at `opts.max_depth` this throws GeometryResolutionError.
/// Boundary normals are those of the reconstructed segments. Throws
/// GeometryConflictError when both level sets vanish (|phi| < 1e-8) at a
/// boundary quadrature point. `cell_id` is only used in error messages.
CellCut cut_cell(const Vec2& origin, double h, const LevelSetDomain& dom,
                 const CutOptions& opts, int cell_id = -1);

/// Tensor Gauss rule on a full cell of size h.
CellRule full_cell_rule(double h, int order);

CellRule cut_volume_rule(const Vec2& origin, double h, const LevelSetDomain& dom,
                         const CutOptions& opts);

BoundaryRule cut_surface_rule(const Vec2& origin, double h, const LevelSetDomain& dom,
                              const CutOptions& opts);

} // namespace cutbiot
