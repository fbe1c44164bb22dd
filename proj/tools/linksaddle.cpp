// Command-line driver: check | geometry | intersect | solve | refine.

#include "linksaddle/commands.hpp"
#include "linksaddle/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

using namespace linksaddle;

int main(int argc, char** argv) {
    CLI::App app{"Linking geometry and saddle points of coupled Poisson systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string seed;
    std::string out_dir;
    bool quiet = false;
    int levels = 0;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--seed", seed, "sampling seed (overrides frame.seed)");
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto* check = app.add_subcommand("check", "run the invariant suites");
    auto* geometry = app.add_subcommand("geometry", "estimate the linking geometry");
    auto* intersect = app.add_subcommand("intersect", "certify intersections and degrees");
    auto* solve = app.add_subcommand("solve", "compute a saddle point");
    auto* refine = app.add_subcommand("refine", "mesh-refinement table of the critical value");
    refine->add_option("--levels", levels, "number of refinement levels (overrides refine.levels)");
    for (auto* sub : {check, geometry, intersect, solve, refine}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? parse_config_text("") : parse_config_file(config_path);
        if (!seed.empty()) set_config_value(cfg, "frame.seed", seed);
        if (!out_dir.empty()) set_config_value(cfg, "output.dir", out_dir);
        if (levels != 0) set_config_value(cfg, "refine.levels", std::to_string(levels));
        validate_config(cfg);

        if (*check) return cmd_check(cfg, quiet, std::cout);
        if (*geometry) return cmd_geometry(cfg, quiet, std::cout);
        if (*intersect) return cmd_intersect(cfg, quiet, std::cout);
        if (*solve) return cmd_solve(cfg, quiet, std::cout);
        return cmd_refine(cfg, quiet, std::cout);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        const bool usage = e.kind() == ErrorKind::Config || e.kind() == ErrorKind::InvalidSpec;
        return usage ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
