#include "cutbiot/forms.hpp"

#include "cutbiot/quadrature.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <cmath>
#include <string>

namespace cutbiot {

void PhysicalParams::validate() const
{
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (!(K >= 0.0)) throw ConfigError("K must be non-negative");
}

BoundaryData BoundaryData::zero()
{
    BoundaryData d;
    d.u_D = [](const Vec2&) -> Vec2 { return Vec2::Zero(); };
    d.g_N = [](const Vec2&, const Vec2&) { return 0.0; };
    d.sigma_N = [](const Vec2&, const Vec2&) -> Vec2 { return Vec2::Zero(); };
    d.p_FD = [](const Vec2&) { return 0.0; };
    d.f = [](const Vec2&) -> Vec2 { return Vec2::Zero(); };
    d.g = [](const Vec2&) { return 0.0; };
    return d;
}

Discretization::Discretization(const MeshConfig& mesh, LevelSetDomain domain,
                               const DiscretizationOptions& opts)
    : opts_(opts), mesh_(mesh), domain_(std::move(domain)),
      active_(classify(mesh_, domain_, opts.cut)), quad_(active_, domain_, opts.cut),
      u_(active_, opts.k, 2), pT_(active_, opts.k - 1, 1), pF_(active_, opts.l, 1),
      layout_(make_layout(u_, pT_, pF_))
{
    if (opts.k < 2) throw ConfigError("displacement degree k must be at least 2");
}

namespace {

std::vector<ShapeValues> tabulate(const FeSpace& s, const std::vector<Vec2>& pts)
{
    std::vector<ShapeValues> out;
    out.reserve(pts.size());
    for (const Vec2& xi : pts) out.push_back(s.eval(xi));
    return out;
}

// Shape tables at volume quadrature points; the full-cell rule is shared by
// all interior cells and tabulated once.
class VolumeTables {
public:
    VolumeTables(const Discretization& d, const FeSpace& s) : d_(d), s_(s) {}

    const std::vector<ShapeValues>& operator()(int cell)
    {
        const CellRule& rule = d_.quadrature().volume(cell);
        if (d_.active().tag(cell) == CellTag::Interior) {
            if (interior_.empty()) interior_ = tabulate(s_, rule.xi);
            return interior_;
        }
        scratch_ = tabulate(s_, rule.xi);
        return scratch_;
    }

private:
    const Discretization& d_;
    const FeSpace& s_;
    std::vector<ShapeValues> interior_, scratch_;
};

class TripletSink {
public:
    void add(const std::vector<int>& rows, const std::vector<int>& cols, const Eigen::MatrixXd& m)
    {
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) t_.emplace_back(rows[i], cols[j], m(i, j));
    }

    SparseMatrix build(int nrows, int ncols) const
    {
        SparseMatrix m(nrows, ncols);
        m.setFromTriplets(t_.begin(), t_.end());
        return m;
    }

private:
    std::vector<Eigen::Triplet<double>> t_;
};

void check_boundary(const BoundaryRule& br, int cell)
{
    if (br.part.size() != br.size() || br.normal.size() != br.size() || br.w.size() != br.size())
        throw AssemblyError("boundary rule of cell " + std::to_string(cell) + " lacks tags");
}

Vec2 physical_point(const Discretization& d, int cell, const Vec2& xi)
{
    return d.mesh().cell_origin(cell) + d.h() * xi;
}

} // namespace

SparseMatrix assemble_a1(const Discretization& d, const PhysicalParams& p, const StabilizationParams& s)
{
    p.validate();
    const FeSpace& V = d.u();
    const int nb = V.nodes_per_cell();
    const double h = d.h();
    VolumeTables tables(d, V);
    TripletSink sink;
    Eigen::MatrixXd local(2 * nb, 2 * nb);
    for (int c : d.active().active_cells()) {
        local.setZero();
        const CellRule& rule = d.quadrature().volume(c);
        const auto& tab = tables(c);
        for (std::size_t q = 0; q < rule.w.size(); ++q) {
            const Eigen::MatrixX2d& G = tab[q].grads;
            const double w = p.mu * rule.w[q];
            for (int a = 0; a < nb; ++a)
                for (int b = 0; b < nb; ++b) {
                    const double gg = G.row(a).dot(G.row(b));
                    for (int ci = 0; ci < 2; ++ci)
                        for (int di = 0; di < 2; ++di)
                            local(2 * a + ci, 2 * b + di) +=
                                0.5 * w * ((ci == di ? gg : 0.0) + G(a, di) * G(b, ci));
                }
        }
        const BoundaryRule& br = d.quadrature().boundary(c);
        check_boundary(br, c);
        for (std::size_t q = 0; q < br.size(); ++q) {
            if (br.part[q] != BoundaryPart::Dirichlet) continue;
            const ShapeValues sv = V.eval(br.xi[q]);
            const Vec2& n = br.normal[q];
            const double w = p.mu * br.w[q];
            const double pen = s.gamma_u / h;
            for (int a = 0; a < nb; ++a) {
                const double dna = sv.grads.row(a).dot(n);
                for (int b = 0; b < nb; ++b) {
                    const double dnb = sv.grads.row(b).dot(n);
                    const double va = sv.values[a], vb = sv.values[b];
                    for (int ci = 0; ci < 2; ++ci)
                        for (int di = 0; di < 2; ++di) {
                            // (eps(phi_b e_d) n)_c phi_a and its transpose
                            const double eb = 0.5 * ((ci == di ? dnb : 0.0) + sv.grads(b, ci) * n[di]);
                            const double ea = 0.5 * ((ci == di ? dna : 0.0) + sv.grads(a, di) * n[ci]);
                            local(2 * a + ci, 2 * b + di) +=
                                w * (-eb * va - ea * vb + (ci == di ? pen * va * vb : 0.0));
                        }
                }
            }
        }
        const auto dofs = V.cell_dofs(c);
        sink.add(dofs, dofs, local);
    }
    return sink.build(V.n_dofs(), V.n_dofs());
}

SparseMatrix assemble_b1(const Discretization& d)
{
    const FeSpace& V = d.u();
    const FeSpace& Q = d.pT();
    const int nb = V.nodes_per_cell(), nq = Q.nodes_per_cell();
    VolumeTables tv(d, V), tq(d, Q);
    TripletSink sink;
    Eigen::MatrixXd local(nq, 2 * nb);
    for (int c : d.active().active_cells()) {
        local.setZero();
        const CellRule& rule = d.quadrature().volume(c);
        const auto& sv = tv(c);
        const auto& sq = tq(c);
        for (std::size_t q = 0; q < rule.w.size(); ++q)
            for (int i = 0; i < nq; ++i) {
                const double wq = rule.w[q] * sq[q].values[i];
                for (int a = 0; a < nb; ++a)
                    for (int ci = 0; ci < 2; ++ci) local(i, 2 * a + ci) -= wq * sv[q].grads(a, ci);
            }
        const BoundaryRule& br = d.quadrature().boundary(c);
        check_boundary(br, c);
        for (std::size_t q = 0; q < br.size(); ++q) {
            if (br.part[q] != BoundaryPart::Dirichlet) continue;
            const ShapeValues bv = V.eval(br.xi[q]);
            const ShapeValues bq = Q.eval(br.xi[q]);
            for (int i = 0; i < nq; ++i)
                for (int a = 0; a < nb; ++a)
                    for (int ci = 0; ci < 2; ++ci)
                        local(i, 2 * a + ci) +=
                            br.w[q] * bq.values[i] * bv.values[a] * br.normal[q][ci];
        }
        sink.add(Q.cell_dofs(c), V.cell_dofs(c), local);
    }
    return sink.build(Q.n_dofs(), V.n_dofs());
}

namespace {

// scale * (phi_i, psi_j)_Omega with rows from `R`, columns from `C`.
SparseMatrix assemble_mass(const Discretization& d, const FeSpace& R, const FeSpace& C, double scale)
{
    const int nr = R.nodes_per_cell(), nc = C.nodes_per_cell();
    VolumeTables tr(d, R), tc(d, C);
    TripletSink sink;
    Eigen::MatrixXd local(nr, nc);
    for (int c : d.active().active_cells()) {
        local.setZero();
        const CellRule& rule = d.quadrature().volume(c);
        const auto& sr = tr(c);
        const auto& sc = tc(c);
        for (std::size_t q = 0; q < rule.w.size(); ++q)
            local.noalias() += (scale * rule.w[q]) * sr[q].values * sc[q].values.transpose();
        sink.add(R.cell_dofs(c), C.cell_dofs(c), local);
    }
    return sink.build(R.n_dofs(), C.n_dofs());
}

} // namespace

SparseMatrix assemble_a2(const Discretization& d, const PhysicalParams& p)
{
    p.validate();
    return assemble_mass(d, d.pT(), d.pT(), 1.0 / p.lambda);
}

SparseMatrix assemble_b2(const Discretization& d, const PhysicalParams& p)
{
    p.validate();
    return assemble_mass(d, d.pT(), d.pF(), 1.0 / p.lambda);
}

A3Blocks assemble_a3(const Discretization& d, const PhysicalParams& p, const StabilizationParams& s)
{
    if (p.K < 0.0) throw ConfigError("K must be non-negative");
    p.validate();
    const FeSpace& Q = d.pF();
    const int nq = Q.nodes_per_cell();
    const double h = d.h();
    VolumeTables tables(d, Q);
    TripletSink sink;
    Eigen::MatrixXd local(nq, nq);
    for (int c : d.active().active_cells()) {
        local.setZero();
        const CellRule& rule = d.quadrature().volume(c);
        const auto& tab = tables(c);
        for (std::size_t q = 0; q < rule.w.size(); ++q)
            local.noalias() += (p.K * rule.w[q]) * tab[q].grads * tab[q].grads.transpose();
        const BoundaryRule& br = d.quadrature().boundary(c);
        check_boundary(br, c);
        for (std::size_t q = 0; q < br.size(); ++q) {
            if (br.part[q] != BoundaryPart::Stress) continue;
            const ShapeValues sv = Q.eval(br.xi[q]);
            const Eigen::VectorXd dn = sv.grads * br.normal[q];
            const double w = p.K * br.w[q];
            local.noalias() -= w * (sv.values * dn.transpose() + dn * sv.values.transpose());
            local.noalias() += (w * s.gamma_p / h) * sv.values * sv.values.transpose();
        }
        const auto dofs = Q.cell_dofs(c);
        sink.add(dofs, dofs, local);
    }
    A3Blocks out;
    out.diffusion = sink.build(Q.n_dofs(), Q.n_dofs());
    out.mass = assemble_mass(d, Q, Q, 2.0 / p.lambda);
    return out;
}

namespace {

// Calls visit(facet, w, jump) for every ghost facet, quadrature point and
// derivative order j, where jump holds side0 - side1 of d_n^j for the local
// shape functions of both cells and w the weight of that term.
template <class Visit>
void for_each_ghost_jump(const FeSpace& space, double scaling, int order, double gamma, Visit&& visit)
{
    if (order < 1) throw ConfigError("ghost order must be at least 1");
    if (order > space.degree())
        throw ConfigError("ghost order " + std::to_string(order) + " exceeds space degree " +
                          std::to_string(space.degree()));
    const ActiveMesh& active = space.active();
    const BackgroundMesh& mesh = active.background();
    const double h = mesh.h();
    const int nb = space.nodes_per_cell();
    const Rule1D line = gauss_for_order(2 * space.degree());
    const std::array<double, 4> factorial{1.0, 1.0, 2.0, 6.0};

    Eigen::VectorXd jump(2 * nb);
    for (int fi : active.ghost_facets()) {
        const Facet& f = mesh.facets()[fi];
        const Vec2& n = f.normal;
        const double len = (f.b - f.a).norm();
        for (std::size_t q = 0; q < line.points.size(); ++q) {
            const Vec2 x = f.a + line.points[q] * (f.b - f.a);
            const double wq = line.weights[q] * len;
            for (int j = 1; j <= order; ++j) {
                for (int side = 0; side < 2; ++side) {
                    const Vec2 xi = (x - mesh.cell_origin(f.cells[side])) / h;
                    const double sign = side == 0 ? 1.0 : -1.0;
                    for (int a = 0; a < nb; ++a) {
                        double dnj = 0.0;
                        for (int ax = 0; ax <= j; ++ax) {
                            const int ay = j - ax;
                            const double nalpha = std::pow(n.x(), ax) * std::pow(n.y(), ay);
                            if (nalpha == 0.0) continue;
                            dnj += space.shape_derivative(a, xi, ax, ay) * nalpha / (factorial[ax] * factorial[ay]);
                        }
                        jump[side * nb + a] = sign * dnj;
                    }
                }
                visit(f, scaling * gamma * std::pow(h, 2 * j - 1) * wq, jump);
            }
        }
    }
}

std::vector<int> facet_dofs(const FeSpace& space, const Facet& f)
{
    std::vector<int> dofs = space.cell_dofs(f.cells[0]);
    const std::vector<int> d1 = space.cell_dofs(f.cells[1]);
    dofs.insert(dofs.end(), d1.begin(), d1.end());
    return dofs;
}

} // namespace

SparseMatrix assemble_ghost(const FeSpace& space, double scaling, int order, double gamma)
{
    const int nb = space.nodes_per_cell();
    const int ncomp = space.ncomp();
    TripletSink sink;
    Eigen::MatrixXd local(2 * nb * ncomp, 2 * nb * ncomp);
    const Facet* current = nullptr;
    const auto flush = [&] {
        if (current) sink.add(facet_dofs(space, *current), facet_dofs(space, *current), local);
    };
    for_each_ghost_jump(space, scaling, order, gamma, [&](const Facet& f, double w, const Eigen::VectorXd& jump) {
        if (&f != current) {
            flush();
            current = &f;
            local.setZero();
        }
        for (int comp = 0; comp < ncomp; ++comp)
            for (int A = 0; A < 2 * nb; ++A)
                for (int B = 0; B < 2 * nb; ++B) local(A * ncomp + comp, B * ncomp + comp) += w * jump[A] * jump[B];
    });
    flush();
    return sink.build(space.n_dofs(), space.n_dofs());
}

double ghost_seminorm(const FeSpace& space, const Eigen::VectorXd& v, double scaling, int order, double gamma)
{
    if (v.size() != space.n_dofs()) throw AssemblyError("ghost seminorm: vector size mismatch");
    const int nb = space.nodes_per_cell();
    const int ncomp = space.ncomp();
    double sum = 0.0;
    for_each_ghost_jump(space, scaling, order, gamma, [&](const Facet& f, double w, const Eigen::VectorXd& jump) {
        const std::vector<int> dofs = facet_dofs(space, f);
        for (int comp = 0; comp < ncomp; ++comp) {
            double jv = 0.0;
            for (int A = 0; A < 2 * nb; ++A) jv += jump[A] * v[dofs[A * ncomp + comp]];
            sum += w * jv * jv;
        }
    });
    return std::sqrt(sum);
}

RhsBlocks assemble_rhs(const Discretization& d, const PhysicalParams& p,
                       const StabilizationParams& s, const BoundaryData& data)
{
    p.validate();
    const FeSpace& V = d.u();
    const FeSpace& T = d.pT();
    const FeSpace& F = d.pF();
    const int nb = V.nodes_per_cell(), nt = T.nodes_per_cell(), nf = F.nodes_per_cell();
    const double h = d.h();
    RhsBlocks out{Eigen::VectorXd::Zero(V.n_dofs()), Eigen::VectorXd::Zero(T.n_dofs()),
                  Eigen::VectorXd::Zero(F.n_dofs())};
    VolumeTables tv(d, V), tf(d, F);
    for (int c : d.active().active_cells()) {
        const auto vd = V.cell_dofs(c);
        const auto td = T.cell_dofs(c);
        const auto fd = F.cell_dofs(c);
        const CellRule& rule = d.quadrature().volume(c);
        const auto& sv = tv(c);
        const auto& sf = tf(c);
        for (std::size_t q = 0; q < rule.w.size(); ++q) {
            const Vec2 x = physical_point(d, c, rule.xi[q]);
            const Vec2 fx = data.f(x);
            const double gx = data.g(x);
            for (int a = 0; a < nb; ++a)
                for (int ci = 0; ci < 2; ++ci) out.L1[vd[2 * a + ci]] += rule.w[q] * fx[ci] * sv[q].values[a];
            for (int i = 0; i < nf; ++i) out.L3[fd[i]] += rule.w[q] * gx * sf[q].values[i];
        }
        const BoundaryRule& br = d.quadrature().boundary(c);
        check_boundary(br, c);
        for (std::size_t q = 0; q < br.size(); ++q) {
            const Vec2 x = physical_point(d, c, br.xi[q]);
            const Vec2& n = br.normal[q];
            const double w = br.w[q];
            if (br.part[q] == BoundaryPart::Dirichlet) {
                const ShapeValues bv = V.eval(br.xi[q]);
                const ShapeValues bt = T.eval(br.xi[q]);
                const ShapeValues bf = F.eval(br.xi[q]);
                const Vec2 uD = data.u_D(x);
                const double gN = data.g_N(x, n);
                for (int a = 0; a < nb; ++a) {
                    const Vec2 ga = bv.grads.row(a).transpose();
                    const double dna = ga.dot(n);
                    for (int ci = 0; ci < 2; ++ci) {
                        // (u_D, mu eps(phi_a e_c) n)
                        const double eps_n = 0.5 * (uD[ci] * dna + uD.dot(ga) * n[ci]);
                        out.L1[vd[2 * a + ci]] +=
                            w * p.mu * (-eps_n + s.gamma_u / h * uD[ci] * bv.values[a]);
                    }
                }
                for (int i = 0; i < nt; ++i) out.L2[td[i]] += w * uD.dot(n) * bt.values[i];
                for (int i = 0; i < nf; ++i) out.L3[fd[i]] -= w * gN * bf.values[i];
            } else {
                const ShapeValues bv = V.eval(br.xi[q]);
                const ShapeValues bf = F.eval(br.xi[q]);
                const Vec2 sN = data.sigma_N(x, n);
                const double pD = data.p_FD(x);
                for (int a = 0; a < nb; ++a)
                    for (int ci = 0; ci < 2; ++ci) out.L1[vd[2 * a + ci]] += w * sN[ci] * bv.values[a];
                for (int i = 0; i < nf; ++i) {
                    const double dn = bf.grads.row(i).dot(n);
                    out.L3[fd[i]] += w * p.K * pD * (dn - s.gamma_p / h * bf.values[i]);
                }
            }
        }
    }
    return out;
}

int ghost_order_for(const StabilizationParams& s, int degree, bool is_total_pressure)
{
    if (s.ghost_order <= 0) return degree;
    return is_total_pressure ? std::min(s.ghost_order, degree) : s.ghost_order;
}

SystemTerms assemble_terms(const Discretization& d, const PhysicalParams& p,
                           const StabilizationParams& s, const BoundaryData& data)
{
    p.validate();
    SystemTerms t;
    t.a1 = assemble_a1(d, p, s);
    t.b1 = assemble_b1(d);
    t.a2 = assemble_a2(d, p);
    t.b2 = assemble_b2(d, p);
    A3Blocks a3 = assemble_a3(d, p, s);
    t.a3_1 = std::move(a3.diffusion);
    t.a3_2 = std::move(a3.mass);
    if (s.ghost) {
        const double h = d.h();
        t.g1 = assemble_ghost(d.u(), p.mu, ghost_order_for(s, d.u().degree(), false), s.gamma_1);
        t.g2 = assemble_ghost(d.pT(), h * h, ghost_order_for(s, d.pT().degree(), true), s.gamma_2);
        const int of = ghost_order_for(s, d.pF().degree(), false);
        t.g3_1 = assemble_ghost(d.pF(), p.K, of, s.gamma_1);
        t.g3_2 = assemble_ghost(d.pF(), 1.0 / p.lambda, of, s.gamma_1);
    }
    t.rhs = assemble_rhs(d, p, s, data);
    return t;
}

namespace {

void append(std::vector<Eigen::Triplet<double>>& out, const SparseMatrix& m, int row_off,
            int col_off, double sign, bool also_transpose)
{
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
            out.emplace_back(row_off + r, col_off + c, sign * it.value());
            if (also_transpose) out.emplace_back(col_off + c, row_off + r, sign * it.value());
        }
}

void check_block(const SparseMatrix& m, int rows, int cols, const char* name)
{
    if (m.rows() != rows || m.cols() != cols)
        throw AssemblyError(std::string("layout mismatch in block ") + name);
}

} // namespace

BlockSystem assemble_system(const FieldLayout& L, const SystemTerms& t, bool with_ghost)
{
    check_block(t.a1, L.n_u, L.n_u, "a1");
    check_block(t.b1, L.n_T, L.n_u, "b1");
    check_block(t.a2, L.n_T, L.n_T, "a2");
    check_block(t.b2, L.n_T, L.n_F, "b2");
    check_block(t.a3_1, L.n_F, L.n_F, "a3_1");
    check_block(t.a3_2, L.n_F, L.n_F, "a3_2");
    if (t.rhs.L1.size() != L.n_u || t.rhs.L2.size() != L.n_T || t.rhs.L3.size() != L.n_F)
        throw AssemblyError("layout mismatch in right-hand side");
    const bool ghost = with_ghost && t.g1.rows() > 0;
    if (ghost) {
        check_block(t.g1, L.n_u, L.n_u, "g1");
        check_block(t.g2, L.n_T, L.n_T, "g2");
        check_block(t.g3_1, L.n_F, L.n_F, "g3_1");
        check_block(t.g3_2, L.n_F, L.n_F, "g3_2");
    }

    std::vector<Eigen::Triplet<double>> trip;
    const int ou = L.offset_u(), oT = L.offset_T(), oF = L.offset_F();
    append(trip, t.a1, ou, ou, 1.0, false);
    append(trip, t.b1, oT, ou, 1.0, true);
    append(trip, t.a2, oT, oT, -1.0, false);
    append(trip, t.b2, oT, oF, 1.0, true);
    append(trip, t.a3_1, oF, oF, -1.0, false);
    append(trip, t.a3_2, oF, oF, -1.0, false);
    if (ghost) {
        append(trip, t.g1, ou, ou, 1.0, false);
        append(trip, t.g2, oT, oT, -1.0, false);
        append(trip, t.g3_1, oF, oF, -1.0, false);
        append(trip, t.g3_2, oF, oF, -1.0, false);
    }
    BlockSystem sys;
    sys.layout = L;
    sys.stabilized = ghost;
    sys.matrix.resize(L.total(), L.total());
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.rhs.resize(L.total());
    sys.rhs << t.rhs.L1, t.rhs.L2, t.rhs.L3;
    return sys;
}

BlockSystem assemble_system(const Discretization& d, const PhysicalParams& p,
                            const StabilizationParams& s, const BoundaryData& data)
{
    return assemble_system(d.layout(), assemble_terms(d, p, s, data), s.ghost);
}

void write_matrix_market(const SparseMatrix& m, const std::string& path)
{
    if (!Eigen::saveMarket(m, path)) throw std::runtime_error("cannot write " + path);
}

} // namespace cutbiot
