#pragma once

#include "cutbiot/solver.hpp"
#include "cutbiot/verification.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cutbiot {

struct ParamCombo {
    double lambda = 1.0;
    double K = 1.0;
};

/// Everything a CLI run needs. Defaults reproduce the circle-minus-flower
/// experiments.
struct RunConfig {
    CircleFlowerGeometry geometry;
    MeshConfig mesh{Vec2(-1.0, -1.0), Vec2(1.0, 1.0), 32};
    std::vector<int> ladder{16, 32, 64, 128};
    PhysicalParams params;
    std::vector<ParamCombo> combos; // convergence grid; empty = {params.lambda, params.K}
    StabilizationParams stab;
    DiscretizationOptions disc;
    std::string case_id = "divfree";

    int sweep_n = 60;
    std::vector<double> deltas; // sweep translations in units of h

    bool write_points = true;
    bool compute_kappa = true;
    int kappa_iterations = 40;
    int workers = 1;
};

/// Default sweep family: delta = k * 5e-4 for k = 1 + 31 i, i = 0..count-1.
std::vector<double> default_deltas(int count = 64, int stride = 31, double step = 5e-4);

/// Parse and validate a JSON config (text). Unknown keys are rejected.
/// Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// One assembled and solved configuration.
struct RunResult {
    FieldLayout layout;
    int active_cells = 0;
    int cut_cells = 0;
    int ghost_facets = 0;
    double h = 0.0;
    SolveReport solve;
    double galerkin = 0.0;
    ErrorReport errors;
};

RunResult run_case(const RunConfig& cfg, const MeshConfig& mesh, const PhysicalParams& params,
                   const StabilizationParams& stab, bool with_kappa);

/// Commands; each writes its artifacts into `out` and returns 0.
/// Pipeline failures propagate as exceptions (see exit_code_for).
int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_convergence(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out);

/// 2 configuration, 3 solver, 4 geometry, 1 anything else.
int exit_code_for(const std::exception& e);
/// {"error": kind, "message": ...} for a failure.
std::string error_json(const std::exception& e);

/// printf-style formatting in the C locale, as used in all CSV output.
std::string format_number(double v);

} // namespace cutbiot
