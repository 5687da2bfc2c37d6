// Command-line driver: solve, diagnose, validate.

#include "due/cli_io.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Dynamic user equilibrium solver and state-operator diagnostics"};
    app.require_subcommand(1);

    std::string network;
    std::string scenario;
    std::string mode;
    due::cli::Overrides overrides;
    std::string out_dir;
    int bins = 0;
    double tol = 0.0;
    int max_iter = 0;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "Output directory");
        cmd->add_option("--bins", bins, "Number of time bins")->check(CLI::PositiveNumber);
        cmd->add_option("--tol", tol, "Gap tolerance (solve) or Picard tolerance (diagnose)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::NonNegativeNumber);
    };

    CLI::App* solve = app.add_subcommand("solve", "Compute a dynamic user equilibrium");
    solve->add_option("network", network, "Network JSON file")->required();
    solve->add_option("scenario", scenario, "Scenario JSON file")->required();
    add_overrides(solve);

    CLI::App* diagnose = app.add_subcommand("diagnose", "State-operator diagnostics");
    diagnose->add_option("mode", mode, "picard | sensitivity | continuity")
        ->required()
        ->check(CLI::IsMember({"picard", "sensitivity", "continuity"}));
    diagnose->add_option("scenario", scenario, "Scenario JSON file")->required();
    add_overrides(diagnose);

    CLI::App* validate = app.add_subcommand("validate", "Check a network file");
    validate->add_option("network", network, "Network JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    CLI::App* active = app.get_subcommands().front();
    if (active != validate) {
        if (active->count("--out") > 0) overrides.out = out_dir;
        if (active->count("--bins") > 0) overrides.bins = bins;
        if (active->count("--tol") > 0) overrides.tol = tol;
        if (active->count("--max-iter") > 0) overrides.max_iter = max_iter;
    }

    if (active == solve) return due::cli::run_solve(network, scenario, overrides, std::cout, std::cerr);
    if (active == diagnose) return due::cli::run_diagnostics(mode, scenario, overrides, std::cout, std::cerr);
    return due::cli::run_validate(network, std::cout, std::cerr);
}
