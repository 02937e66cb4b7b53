#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qheat/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qheat: heat kernels of the Kohn Laplacian on quadric submanifolds (lambda-transform side)"};
    app.require_subcommand(1);
    qheat::cli::GlobalOptions opts;
    app.add_option("--config", opts.config_path, "JSON job config")->required();
    app.add_option("--out", opts.out_path, "output file (written only on success)");
    app.add_option("--threads", opts.threads, "cap on worker threads (0 = all cores)");
    app.add_option("--tol", opts.tol_rel, "relative rank cut for the eigen-decomposition");
    app.add_flag("--ablate-phase", opts.ablate_phase, "debug: drop the twisted phase (negative control)");
    app.fallthrough();

    std::string command;
    for (const char* name : {"eval", "scan", "verify", "evolve"}) {
        auto* sub = app.add_subcommand(name);
        sub->callback([&command, name] { command = name; });
    }
    app.get_subcommand("eval")->description("evaluate rho-hat or the weighted kernel at points (JSON lines)");
    app.get_subcommand("scan")->description("scan rho-hat over a grid in adapted coordinates (CSV)");
    app.get_subcommand("verify")->description("run the verification checks (JSON report)");
    app.get_subcommand("evolve")->description("evolve initial data through the weighted heat kernel (CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qheat::cli::kExitInput;
    }
    return qheat::cli::run_command(command, opts, std::cout, std::cerr);
}
