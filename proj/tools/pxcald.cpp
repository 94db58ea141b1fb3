#include <CLI11.hpp>
#include <iostream>

#include "runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pxcald: forward map and reconstruction for the 1-D p(x)-Laplace Calderon problem"};
    app.set_version_flag("--version", PXCALD_VERSION);

    std::string task;
    std::string config;
    pxcald::cli::Overrides ov;
    app.add_option("task", task, "forward-sweep | fixed-point | extremal | moments | reconstruct | interior")
        ->required();
    app.add_option("--config", config, "experiment config (JSON)")->required();
    app.add_option("--out", ov.out, "output directory (overrides out)");
    app.add_option("--seed", ov.seed, "noise seed (overrides seed)");
    app.add_option("--noise", ov.noise, "multiplicative noise level (overrides noise)");
    app.add_option("--N", ov.order, "moment/derivative order (overrides N)");
    app.add_option("--mode", ov.mode, "measured | oracle (overrides mode)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : pxcald::cli::kExitConfig;
    }
    return pxcald::cli::run_cli(task, config, ov);
}
