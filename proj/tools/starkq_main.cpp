#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "stark/cli_commands.hpp"
#include "stark/errors.hpp"

using stark::cli::Config;
using stark::cli::RunConfig;

int main(int argc, char** argv) {
    CLI::App app{"starkq: constructs decaying perturbations of Stark-type operators with "
                 "prescribed embedded eigenvalues and certifies the decay/counting bounds"};
    app.require_subcommand(1);

    std::string config_path, out, bundle, format;
    long seed = -1;
    int jobs = -1;

    auto* construct = app.add_subcommand("construct", "build a potential bundle");
    construct->add_option("--config", config_path, "configuration file")->required();
    auto* verify = app.add_subcommand("verify", "re-derive the checks of a bundle");
    verify->add_option("--config", config_path, "configuration file");
    verify->add_option("--bundle", bundle, "bundle directory");
    auto* sweep = app.add_subcommand("sweep", "coupling/exponent sweep table");
    sweep->add_option("--config", config_path, "configuration file")->required();
    auto* exp = app.add_subcommand("export", "emit plot-ready CSV series");
    exp->add_option("--config", config_path, "configuration file");
    exp->add_option("--bundle", bundle, "bundle directory");
    exp->add_option("--format", format, "csv | summary");

    for (auto* sub : {construct, verify, sweep, exp}) {
        sub->add_option("--out", out, "output directory");
        sub->add_option("--jobs", jobs, "worker count");
        sub->add_option("--seed", seed, "seed for randomized checks");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig rc;
        if (!config_path.empty())
            rc = RunConfig::from(Config::parse_file(config_path));
        if (!out.empty()) rc.out = out;
        if (!bundle.empty()) rc.bundle = bundle;
        if (!format.empty()) rc.format = format;
        if (jobs > 0) rc.jobs = jobs;
        if (seed >= 0) rc.seed = static_cast<std::uint64_t>(seed);

        if (construct->parsed()) {
            rc.command = "construct";
            return stark::cli::cmd_construct(rc);
        }
        if (verify->parsed()) {
            rc.command = "verify";
            return stark::cli::cmd_verify(rc);
        }
        if (sweep->parsed()) {
            rc.command = "sweep";
            return stark::cli::cmd_sweep(rc);
        }
        rc.command = "export";
        return stark::cli::cmd_export(rc);
    } catch (const stark::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
