#include "cutbiot/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace cutbiot {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<double> default_deltas(int count, int stride, double step)
{
    std::vector<double> d;
    d.reserve(count);
    for (int i = 0; i < count; ++i) d.push_back((1 + stride * i) * step);
    return d;
}

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError("config: unknown key '" + where + "." + k + "'");
}

template <class T>
void read(const json& obj, const char* key, T& out)
{
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

Vec2 read_point(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError("config: box corners need two coordinates");
    return {v[0], v[1]};
}

void validate(RunConfig& c)
{
    circle_minus_flower(c.geometry); // throws on invalid shapes
    BackgroundMesh(c.mesh.box_lo, c.mesh.box_hi, c.mesh.n);
    c.params.validate();
    for (const ParamCombo& pc : c.combos) PhysicalParams{c.params.mu, pc.lambda, pc.K}.validate();
    if (c.ladder.size() < 3) throw ConfigError("convergence ladder needs at least 3 levels");
    for (std::size_t i = 0; i < c.ladder.size(); ++i) {
        if (c.ladder[i] < 2) throw ConfigError("ladder levels must be at least 2");
        if (i > 0 && c.ladder[i] <= c.ladder[i - 1])
            throw ConfigError("ladder must be strictly increasing");
    }
    if (c.disc.k < 2 || c.disc.k > 3 || c.disc.l < 1 || c.disc.l > 3)
        throw ConfigError("degrees: need k in {2,3} and l in {1,2,3}");
    if (c.disc.cut.depth < 0 || c.disc.cut.max_depth < c.disc.cut.depth || c.disc.cut.max_depth > 10)
        throw ConfigError("invalid sub-grid depth");
    if (c.disc.cut.order < 1) throw ConfigError("quadrature order must be positive");
    if (c.disc.cut.n_probe < 2) throw ConfigError("n_probe must be at least 2");
    const StabilizationParams& s = c.stab;
    if (!(s.gamma_u > 0.0) || !(s.gamma_p > 0.0)) throw ConfigError("Nitsche parameters must be positive");
    if (!(s.gamma_1 >= 0.0) || !(s.gamma_2 >= 0.0)) throw ConfigError("ghost factors must be non-negative");
    if (s.ghost_order < 0 || s.ghost_order > std::min(c.disc.k, c.disc.l))
        throw ConfigError("ghost_order exceeds the field degrees");
    if (c.sweep_n < 2) throw ConfigError("sweep.n must be at least 2");
    if (c.deltas.empty()) throw ConfigError("sweep needs at least one delta");
    for (double d : c.deltas)
        if (!(d >= 0.0)) throw ConfigError("sweep deltas must be non-negative");
    if (c.kappa_iterations < 1) throw ConfigError("kappa_iterations must be positive");
    if (c.workers < 1) throw ConfigError("workers must be positive");
    make_case(c.case_id, c.params);
}

} // namespace

RunConfig parse_config(const std::string& text)
{
    RunConfig c;
    c.deltas = default_deltas();
    try {
        const json j = json::parse(text);
        reject_unknown(j, "", {"geometry", "mesh", "params", "convergence", "stabilization",
                               "discretization", "case", "sweep", "output", "workers"});
        if (j.contains("geometry")) {
            const json& g = j["geometry"];
            reject_unknown(g, "geometry", {"radius", "r0", "r1", "petals"});
            read(g, "radius", c.geometry.radius);
            read(g, "r0", c.geometry.r0);
            read(g, "r1", c.geometry.r1);
            read(g, "petals", c.geometry.petals);
        }
        if (j.contains("mesh")) {
            const json& m = j["mesh"];
            reject_unknown(m, "mesh", {"box_lo", "box_hi", "n", "ladder"});
            if (m.contains("box_lo")) c.mesh.box_lo = read_point(m["box_lo"]);
            if (m.contains("box_hi")) c.mesh.box_hi = read_point(m["box_hi"]);
            read(m, "n", c.mesh.n);
            read(m, "ladder", c.ladder);
        }
        if (j.contains("params")) {
            const json& p = j["params"];
            reject_unknown(p, "params", {"mu", "lambda", "K"});
            read(p, "mu", c.params.mu);
            read(p, "lambda", c.params.lambda);
            read(p, "K", c.params.K);
        }
        if (j.contains("convergence")) {
            const json& cv = j["convergence"];
            reject_unknown(cv, "convergence", {"combos"});
            for (const json& e : cv.value("combos", json::array())) {
                reject_unknown(e, "convergence.combos[]", {"lambda", "K"});
                c.combos.push_back({e.at("lambda").get<double>(), e.at("K").get<double>()});
            }
        }
        if (j.contains("stabilization")) {
            const json& s = j["stabilization"];
            reject_unknown(s, "stabilization",
                           {"gamma_u", "gamma_p", "gamma_1", "gamma_2", "ghost_order", "enabled"});
            read(s, "gamma_u", c.stab.gamma_u);
            read(s, "gamma_p", c.stab.gamma_p);
            read(s, "gamma_1", c.stab.gamma_1);
            read(s, "gamma_2", c.stab.gamma_2);
            read(s, "ghost_order", c.stab.ghost_order);
            read(s, "enabled", c.stab.ghost);
        }
        if (j.contains("discretization")) {
            const json& d = j["discretization"];
            reject_unknown(d, "discretization",
                           {"k", "l", "n_probe", "depth", "max_depth", "order", "sliver_tol"});
            read(d, "k", c.disc.k);
            read(d, "l", c.disc.l);
            read(d, "n_probe", c.disc.cut.n_probe);
            read(d, "depth", c.disc.cut.depth);
            read(d, "max_depth", c.disc.cut.max_depth);
            read(d, "order", c.disc.cut.order);
            read(d, "sliver_tol", c.disc.cut.sliver_tol);
        }
        read(j, "case", c.case_id);
        if (j.contains("sweep")) {
            const json& s = j["sweep"];
            reject_unknown(s, "sweep", {"n", "deltas", "count", "stride", "step"});
            read(s, "n", c.sweep_n);
            if (s.contains("deltas")) {
                if (s.contains("count") || s.contains("stride") || s.contains("step"))
                    throw ConfigError("sweep: give either deltas or count/stride/step");
                c.deltas = s["deltas"].get<std::vector<double>>();
            } else {
                c.deltas = default_deltas(s.value("count", 64), s.value("stride", 31), s.value("step", 5e-4));
            }
        }
        if (j.contains("output")) {
            const json& o = j["output"];
            reject_unknown(o, "output", {"points", "kappa", "kappa_iterations"});
            read(o, "points", c.write_points);
            read(o, "kappa", c.compute_kappa);
            read(o, "kappa_iterations", c.kappa_iterations);
        }
        read(j, "workers", c.workers);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate(c);
    return c;
}

RunConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 12);
    return std::string(buf, r.ptr);
}

namespace {

std::string format_exact(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Runs fn(0..n-1) on `workers` threads; the first failure (by index) is rethrown.
template <class F>
void run_jobs(int n, int workers, F&& fn)
{
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nt = std::max(1, std::min(workers, n));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

template <class OnDone>
RunResult solve_case(const RunConfig& cfg, const MeshConfig& mesh, const PhysicalParams& params,
                     const StabilizationParams& stab, bool with_kappa, OnDone&& on_done)
{
    const Discretization d(mesh, circle_minus_flower(cfg.geometry), cfg.disc);
    const ManufacturedCase mc = make_case(cfg.case_id, params);
    const BlockSystem sys = assemble_system(d, params, stab, mc.data());
    RunResult r;
    r.layout = d.layout();
    r.active_cells = static_cast<int>(d.active().active_cells().size());
    r.cut_cells = static_cast<int>(d.active().cut_cells().size());
    r.ghost_facets = static_cast<int>(d.active().ghost_facets().size());
    r.h = d.h();
    SolverOptions so;
    if (with_kappa) so.condition_iterations = cfg.kappa_iterations;
    r.solve = solve(sys, so);
    r.galerkin = galerkin_residual(sys, r.solve.x);
    r.errors = error_norms(d, r.solve.x, mc, stab);
    on_done(d, r);
    return r;
}

void ensure_dir(const fs::path& out)
{
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw ConfigError("cannot create output directory " + out.string());
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    return os;
}

json errors_json(const ErrorReport& e)
{
    return json{{"u_V", e.u_V},         {"u_star", e.u_star},   {"u_L2", e.u_L2},
                {"pT_L2", e.pT_L2},     {"pT_star", e.pT_star}, {"pF_F", e.pF_F},
                {"pF_star", e.pF_star}, {"pF_L2", e.pF_L2}};
}

} // namespace

RunResult run_case(const RunConfig& cfg, const MeshConfig& mesh, const PhysicalParams& params,
                   const StabilizationParams& stab, bool with_kappa)
{
    return solve_case(cfg, mesh, params, stab, with_kappa, [](const Discretization&, const RunResult&) {});
}

int cmd_solve(const RunConfig& cfg, const fs::path& out)
{
    ensure_dir(out);
    double norm[3] = {0, 0, 0};
    std::string points;
    const RunResult r = solve_case(
        cfg, cfg.mesh, cfg.params, cfg.stab, cfg.compute_kappa,
        [&](const Discretization& d, const RunResult& res) {
            const FieldLayout& L = d.layout();
            const Eigen::VectorXd& x = res.solve.x;
            const auto xu = x.segment(L.offset_u(), L.n_u);
            const auto xT = x.segment(L.offset_T(), L.n_T);
            const auto xF = x.segment(L.offset_F(), L.n_F);
            for (int c : d.active().active_cells()) {
                const CellRule& rule = d.quadrature().volume(c);
                for (std::size_t q = 0; q < rule.w.size(); ++q) {
                    const Vec2& xi = rule.xi[q];
                    const double ux = evaluate(d.u(), xu, c, xi, 0), uy = evaluate(d.u(), xu, c, xi, 1);
                    norm[0] += rule.w[q] * (ux * ux + uy * uy);
                    norm[1] += rule.w[q] * std::pow(evaluate(d.pT(), xT, c, xi), 2);
                    norm[2] += rule.w[q] * std::pow(evaluate(d.pF(), xF, c, xi), 2);
                }
            }
            if (!cfg.write_points) return;
            std::string s = "x,y,ux,uy,pT,pF\n";
            const Vec2 mid(0.5, 0.5);
            for (int c : d.active().active_cells()) {
                const Vec2 X = d.mesh().cell_center(c);
                if (!d.domain().inside(X)) continue;
                const double vals[6] = {X.x(),
                                        X.y(),
                                        evaluate(d.u(), xu, c, mid, 0),
                                        evaluate(d.u(), xu, c, mid, 1),
                                        evaluate(d.pT(), xT, c, mid),
                                        evaluate(d.pF(), xF, c, mid)};
                for (int i = 0; i < 6; ++i) s += format_number(vals[i]) + (i < 5 ? "," : "\n");
            }
            points = std::move(s);
        });

    json j;
    j["command"] = "solve";
    j["case"] = cfg.case_id;
    j["N"] = cfg.mesh.n;
    j["h"] = r.h;
    j["stabilized"] = cfg.stab.ghost;
    j["params"] = {{"mu", cfg.params.mu}, {"lambda", cfg.params.lambda}, {"K", cfg.params.K}};
    j["dofs"] = {{"u", r.layout.n_u}, {"pT", r.layout.n_T}, {"pF", r.layout.n_F}, {"total", r.layout.total()}};
    j["cells"] = {{"active", r.active_cells}, {"cut", r.cut_cells}};
    j["ghost_facets"] = r.ghost_facets;
    j["relative_residual"] = r.solve.relative_residual;
    j["galerkin_residual"] = r.galerkin;
    j["kappa"] = r.solve.kappa ? json(*r.solve.kappa) : json(nullptr);
    j["solution_norms"] = {{"u_L2", std::sqrt(norm[0])}, {"pT_L2", std::sqrt(norm[1])},
                           {"pF_L2", std::sqrt(norm[2])}};
    j["errors"] = errors_json(r.errors);
    open_out(out / "summary.json") << j.dump(2) << '\n';
    if (cfg.write_points) open_out(out / "points.csv") << points;
    return 0;
}

int cmd_convergence(const RunConfig& cfg, const fs::path& out)
{
    ensure_dir(out);
    std::vector<ParamCombo> combos = cfg.combos;
    if (combos.empty()) combos.push_back({cfg.params.lambda, cfg.params.K});
    const int nl = static_cast<int>(cfg.ladder.size());
    const int njobs = static_cast<int>(combos.size()) * nl;
    std::vector<RunResult> results(njobs);
    run_jobs(njobs, cfg.workers, [&](int i) {
        const ParamCombo& pc = combos[i / nl];
        MeshConfig mesh = cfg.mesh;
        mesh.n = cfg.ladder[i % nl];
        results[i] = run_case(cfg, mesh, PhysicalParams{cfg.params.mu, pc.lambda, pc.K}, cfg.stab, false);
        results[i].solve.x.resize(0);
    });

    std::ostringstream os;
    os << "N,h,lambda,K,err_u_star,err_u_L2,err_pT_star,err_pF_star,err_pF_L2,"
          "eoc_u_star,eoc_u_L2,eoc_pT_star,eoc_pF_star,eoc_pF_L2\n";
    using Getter = double (*)(const ErrorReport&);
    const Getter getters[5] = {
        [](const ErrorReport& e) { return e.u_star; }, [](const ErrorReport& e) { return e.u_L2; },
        [](const ErrorReport& e) { return e.pT_star; }, [](const ErrorReport& e) { return e.pF_star; },
        [](const ErrorReport& e) { return e.pF_L2; }};
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        std::vector<std::vector<std::optional<double>>> rates;
        for (const Getter g : getters) {
            std::vector<std::pair<double, double>> lv;
            for (int l = 0; l < nl; ++l) {
                const RunResult& r = results[ci * nl + l];
                lv.emplace_back(r.h, g(r.errors));
            }
            rates.push_back(eoc(lv));
        }
        for (int l = 0; l < nl; ++l) {
            const RunResult& r = results[ci * nl + l];
            os << cfg.ladder[l] << ',' << format_number(r.h) << ',' << format_number(combos[ci].lambda)
               << ',' << format_number(combos[ci].K);
            for (const Getter g : getters) os << ',' << format_number(g(r.errors));
            for (const auto& rate : rates) {
                os << ',';
                if (l == 0) continue;
                os << (rate[l - 1] ? format_number(*rate[l - 1]) : std::string("saturated"));
            }
            os << '\n';
        }
    }
    open_out(out / "convergence.csv") << os.str();
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out)
{
    ensure_dir(out);
    // --no-stab on the command line leaves only the unstabilized arm.
    std::vector<bool> arms = cfg.stab.ghost ? std::vector<bool>{true, false} : std::vector<bool>{false};
    const int na = static_cast<int>(arms.size());
    const int nd = static_cast<int>(cfg.deltas.size());
    struct Row {
        bool ok = false;
        ErrorReport e;
        double kappa = std::nan("");
    };
    std::vector<Row> rows(nd * na);
    MeshConfig base = cfg.mesh;
    base.n = cfg.sweep_n;
    run_jobs(nd * na, cfg.workers, [&](int i) {
        StabilizationParams s = cfg.stab;
        s.ghost = arms[i % na];
        try {
            RunResult r = run_case(cfg, translate_box(base, cfg.deltas[i / na]), cfg.params, s, cfg.compute_kappa);
            rows[i].ok = true;
            rows[i].e = r.errors;
            if (r.solve.kappa) rows[i].kappa = *r.solve.kappa;
        } catch (const SolverError& e) {
            log_warning("sweep delta " + format_exact(cfg.deltas[i / na]) + ": " + e.what());
        }
    });

    std::ostringstream os;
    os << "delta,stabilized,err_u_star,err_pT_star,err_pF_star,err_u_L2,kappa,solver_status\n";
    for (int i = 0; i < nd * na; ++i) {
        const Row& r = rows[i];
        const double nan = std::nan("");
        os << format_exact(cfg.deltas[i / na]) << ',' << (arms[i % na] ? "true" : "false") << ','
           << format_number(r.ok ? r.e.u_star : nan) << ',' << format_number(r.ok ? r.e.pT_star : nan) << ','
           << format_number(r.ok ? r.e.pF_star : nan) << ',' << format_number(r.ok ? r.e.u_L2 : nan) << ','
           << format_number(r.kappa) << ',' << (r.ok ? "ok" : "failed") << '\n';
    }
    open_out(out / "sweep.csv") << os.str();
    return 0;
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const SolverError*>(&e)) return 3;
    if (dynamic_cast<const GeometryResolutionError*>(&e) || dynamic_cast<const GeometryConflictError*>(&e))
        return 4;
    return 1;
}

std::string error_json(const std::exception& e)
{
    json j;
    j["message"] = e.what();
    if (dynamic_cast<const ConfigError*>(&e)) {
        j["error"] = "config";
    } else if (auto* s = dynamic_cast<const SolverError*>(&e)) {
        j["error"] = "solver";
        j["location"] = s->location();
    } else if (auto* g = dynamic_cast<const GeometryResolutionError*>(&e)) {
        j["error"] = "geometry";
        j["cell"] = g->cell();
    } else if (auto* g2 = dynamic_cast<const GeometryConflictError*>(&e)) {
        j["error"] = "geometry";
        j["cell"] = g2->cell();
    } else if (dynamic_cast<const AssemblyError*>(&e)) {
        j["error"] = "assembly";
    } else {
        j["error"] = "internal";
    }
    return j.dump();
}

} // namespace cutbiot
