#include "cutbiot/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

void report_failure(const std::exception& e, const std::string& out)
{
    const std::string msg = cutbiot::error_json(e);
    std::cerr << msg << '\n';
    if (out.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    std::ofstream(std::filesystem::path(out) / "error.json") << msg << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cutbiot: cut finite element solver for the three-field Biot system"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = 0;
    bool no_stab = false;
    std::vector<CLI::App*> subs;
    for (const char* name : {"solve", "convergence", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--workers", workers, "parallel jobs (overrides the config)")->check(CLI::PositiveNumber);
        sub->add_flag("--no-stab", no_stab, "disable ghost penalties");
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        cutbiot::RunConfig cfg = cutbiot::load_config(config_path);
        if (workers > 0) cfg.workers = workers;
        if (no_stab) cfg.stab.ghost = false;
        if (subs[0]->parsed()) return cutbiot::cmd_solve(cfg, out_dir);
        if (subs[1]->parsed()) return cutbiot::cmd_convergence(cfg, out_dir);
        return cutbiot::cmd_sweep(cfg, out_dir);
    } catch (const std::exception& e) {
        report_failure(e, out_dir);
        return cutbiot::exit_code_for(e);
    }
}
