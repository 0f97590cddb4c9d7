#pragma once

#include "cutbiot/mesh.hpp"
#include "cutbiot/spaces.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <string>

namespace cutbiot {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Material parameters. Biot-Willis coefficient, storage and time step are
/// fixed to 1, 1/lambda and 1.
struct PhysicalParams {
    double mu = 1.0;
    double lambda = 1.0;
    double K = 1.0;

    void validate() const;
};

/// Nitsche and ghost-penalty constants.
struct StabilizationParams {
    double gamma_u = 40.0;
    double gamma_p = 40.0;
    double gamma_1 = 0.1;  // ghost factor for displacement and fluid pressure
    double gamma_2 = 0.01; // ghost factor for total pressure
    int ghost_order = 0;   // highest normal-derivative order; 0 = each field's degree
    bool ghost = true;
};

/// Data of the boundary value problem. g_N and sigma_N receive the outward
/// normal of the boundary point.
struct BoundaryData {
    VectorFunction u_D;
    std::function<double(const Vec2&, const Vec2&)> g_N;
    std::function<Vec2(const Vec2&, const Vec2&)> sigma_N;
    ScalarFunction p_FD;
    VectorFunction f;
    ScalarFunction g;

    static BoundaryData zero();
};

struct DiscretizationOptions {
    int k = 2; // displacement degree; total pressure uses k-1
    int l = 2; // fluid pressure degree
    CutOptions cut;
};

/// Background mesh, active mesh, cut quadrature and the three spaces of one
/// geometric configuration. Immovable: the parts reference each other.
class Discretization {
public:
    Discretization(const MeshConfig& mesh, LevelSetDomain domain,
                   const DiscretizationOptions& opts = {});
    Discretization(const Discretization&) = delete;
    Discretization& operator=(const Discretization&) = delete;

    const BackgroundMesh& mesh() const { return mesh_; }
    const LevelSetDomain& domain() const { return domain_; }
    const ActiveMesh& active() const { return active_; }
    const CutQuadrature& quadrature() const { return quad_; }
    const FeSpace& u() const { return u_; }
    const FeSpace& pT() const { return pT_; }
    const FeSpace& pF() const { return pF_; }
    const FieldLayout& layout() const { return layout_; }
    const DiscretizationOptions& options() const { return opts_; }
    double h() const { return mesh_.h(); }

private:
    DiscretizationOptions opts_;
    BackgroundMesh mesh_;
    LevelSetDomain domain_;
    ActiveMesh active_;
    CutQuadrature quad_;
    FeSpace u_, pT_, pF_;
    FieldLayout layout_;
};

/// mu (eps(u), eps(v)) plus the symmetric Nitsche terms on the Dirichlet part.
SparseMatrix assemble_a1(const Discretization& d, const PhysicalParams& p,
                         const StabilizationParams& s);
/// Rows: total pressure, columns: displacement. -(div v, q) + (v.n, q)_{Dirichlet}.
SparseMatrix assemble_b1(const Discretization& d);
/// (1/lambda) (p_T, q_T).
SparseMatrix assemble_a2(const Discretization& d, const PhysicalParams& p);
/// Rows: total pressure, columns: fluid pressure. (1/lambda) (p_F, q_T).
SparseMatrix assemble_b2(const Discretization& d, const PhysicalParams& p);

struct A3Blocks {
    SparseMatrix diffusion; // K-weighted gradient part with Nitsche terms on the stress part
    SparseMatrix mass;      // (2/lambda) (p_F, q_F)

    SparseMatrix sum() const { return diffusion + mass; }
};
A3Blocks assemble_a3(const Discretization& d, const PhysicalParams& p, const StabilizationParams& s);

/// Facet ghost penalty
///   scaling * gamma * sum_F sum_{j=1..order} h^(2j-1) ([d_n^j v], [d_n^j w])_F
/// over the ghost facets, d_n^j v = sum_{|alpha|=j} D^alpha v n^alpha / alpha!.
/// Vector spaces are penalized componentwise. Throws ConfigError if
/// order > degree or order < 1.
SparseMatrix assemble_ghost(const FeSpace& space, double scaling, int order, double gamma);
/// |v|_g for the same penalty, summed facet by facet so that exact zeros
/// are not lost to cancellation in v^T G v.
double ghost_seminorm(const FeSpace& space, const Eigen::VectorXd& v, double scaling, int order, double gamma);

struct RhsBlocks {
    Eigen::VectorXd L1, L2, L3;
};
RhsBlocks assemble_rhs(const Discretization& d, const PhysicalParams& p,
                       const StabilizationParams& s, const BoundaryData& data);

/// Every form of the discrete problem, kept separately.
struct SystemTerms {
    SparseMatrix a1, b1, a2, b2, a3_1, a3_2;
    SparseMatrix g1, g2, g3_1, g3_2; // empty when ghost penalties are off
    RhsBlocks rhs;
};

SystemTerms assemble_terms(const Discretization& d, const PhysicalParams& p,
                           const StabilizationParams& s, const BoundaryData& data);

/// Symmetric indefinite block system
///   [ A1+G1   B1^T       0           ]
///   [ B1     -(A2+G2)    B2          ]
///   [ 0       B2^T      -(A3+G3)     ]
struct BlockSystem {
    FieldLayout layout;
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    bool stabilized = true;
};

/// Combine the terms; ghost blocks are included only if `with_ghost` and present.
BlockSystem assemble_system(const FieldLayout& layout, const SystemTerms& terms, bool with_ghost);
BlockSystem assemble_system(const Discretization& d, const PhysicalParams& p,
                            const StabilizationParams& s, const BoundaryData& data);

/// Per-field ghost order for a space of the given degree.
int ghost_order_for(const StabilizationParams& s, int degree, bool is_total_pressure);

void write_matrix_market(const SparseMatrix& m, const std::string& path);

} // namespace cutbiot
